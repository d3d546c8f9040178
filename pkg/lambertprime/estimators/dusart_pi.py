"""
Dusart's approximation pi(n) ~ n / (ln n - 1).

The bound is proven for n > 5393; smaller inputs are evaluated but flagged.
"""

from typing import Optional

import mpmath
from mpmath import mp

from ..config import DEFAULT_PRECISION, DUSART_PROVEN_FROM, GUARD_DIGITS
from ..errors import DomainError
from ..precision_core import HPReal, Number, check_precision, to_hpreal
from .base import EstimatorId, NoParams, PrimeEstimator


def dusart_pi(n: Number, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    n / (ln n - 1).

    Accepts any HPReal n so that it can be composed with base_w_pn.

    Raises:
        DomainError: For n < 2 or wherever ln n - 1 <= 0
    """
    check_precision(prec)
    with mp.workdps(prec + GUARD_DIGITS):
        x = to_hpreal(n, prec + GUARD_DIGITS)
        if x < 2:
            raise DomainError(f"dusart_pi requires n >= 2, got {n}")
        denominator = mpmath.log(x) - 1
        if denominator <= 0:
            raise DomainError(f"dusart_pi requires ln n > 1, got n={n}")
        value = x / denominator
    with mp.workdps(prec):
        return +value


class DusartPi(PrimeEstimator[NoParams]):
    """pi(n) by Dusart's n / (ln n - 1)."""

    id = EstimatorId.DUSART_PI
    truth = "pi_n"

    @staticmethod
    def evaluate(n: int, params: Optional[NoParams] = None, *, pi_n=None, model=None,
                 prec: int = DEFAULT_PRECISION) -> HPReal:
        return dusart_pi(n, prec)

    @classmethod
    def flags(cls, n: int) -> list[str]:
        return [] if n >= DUSART_PROVEN_FROM else ["outside_proven_regime"]


# Alias for the estimator class
Model = DusartPi
