"""
Functional inverse of the Gram series, used as a p(n) estimator.
"""

from typing import Optional

import mpmath
from mpmath import mp, mpf

from ..config import DEFAULT_PRECISION, GUARD_DIGITS
from ..errors import DomainError
from ..precision_core import HPReal, bisect_root, check_precision
from .base import EstimatorId, PrimeEstimator
from .gram_pi import GramParams, gram_series


def gram_inverse(k: int, include_unit: bool = True, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    x with gram_pi(x) = k.

    Bisection on [k, 3k ln(k+2)] down to the guard digits, then one secant
    step.

    Args:
        k: Target count, k >= 1
        include_unit: Forwarded to the Gram series
        prec: Significant decimal digits

    Returns:
        x with |gram_pi(x) - k| <= 10^(5-prec) * k

    Raises:
        DomainError: For k < 1
        BracketError: If the bracket holds no sign change
    """
    if k < 1:
        raise DomainError(f"gram_inverse requires k >= 1, got {k}")
    check_precision(prec)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        target = mpf(k)
        lo = mpf(k)
        hi = 3 * target * mpmath.log(k + 2)
        root = bisect_root(
            lambda x: gram_series(x, include_unit, work) - target,
            lo, hi, rel_tol=mpf(10) ** (-work),
        )
    with mp.workdps(prec):
        return +root


class GramInversePn(PrimeEstimator[GramParams]):
    """p(n) by inverting the Gram series."""

    id = EstimatorId.GRAM_INVERSE_PN
    truth = "p_n"

    @staticmethod
    def evaluate(n: int, params: Optional[GramParams] = None, *, pi_n=None, model=None,
                 prec: int = DEFAULT_PRECISION) -> HPReal:
        params = params or GramParams()
        return gram_inverse(n, params.include_unit, prec)


# Alias for the estimator class
Model = GramInversePn
