"""
Gram series for Riemann's R function.

R(x) = 1 + sum_{k>=1} (ln x)^k / (k k! zeta(k+1))

The displayed form of the series in some sources omits the leading 1;
``include_unit=False`` evaluates that literal form.
"""

from typing import Optional

import mpmath
from mpmath import mp, mpf
from pydantic import BaseModel

from ..config import DEFAULT_PRECISION, GUARD_DIGITS
from ..errors import DomainError
from ..precision_core import HPReal, Number, check_precision, to_hpreal, zeta_int
from .base import EstimatorId, PrimeEstimator

MAX_GRAM_TERMS = 100_000


def gram_series(x: HPReal, include_unit: bool, work: int) -> HPReal:
    """Gram sum at ``work`` digits, unrounded. Caller checks x >= 1."""
    with mp.workdps(work):
        log_x = mpmath.log(x)
        total = mpf(1) if include_unit else mpf(0)
        if log_x == 0:
            return total
        eps = mpf(10) ** (-work)
        power = mpf(1)  # (ln x)^k / k!
        previous = None
        for k in range(1, MAX_GRAM_TERMS):
            power = power * log_x / k
            term = power / (k * zeta_int(k + 1, work))
            total += term
            decreasing = previous is not None and term < previous
            if decreasing and term < eps * abs(total):
                break
            previous = term
        return total


def gram_pi(x: Number, include_unit: bool = True, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    Gram series approximation of pi(x).

    Args:
        x: Argument, x >= 1
        include_unit: Add the leading 1 of R(x)
        prec: Significant decimal digits

    Raises:
        DomainError: For x < 1
    """
    check_precision(prec)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        x = to_hpreal(x, work)
        if x < 1:
            raise DomainError(f"gram_pi requires x >= 1, got {mpmath.nstr(x, 20)}")
        value = gram_series(x, include_unit, work)
    with mp.workdps(prec):
        return +value


class GramParams(BaseModel):
    """Parameters for the Gram estimators."""
    include_unit: bool = True


class GramPi(PrimeEstimator[GramParams]):
    id = EstimatorId.GRAM_PI
    truth = "pi_n"

    @staticmethod
    def evaluate(n: int, params: Optional[GramParams] = None, *, pi_n=None, model=None,
                 prec: int = DEFAULT_PRECISION) -> HPReal:
        params = params or GramParams()
        return gram_pi(n, params.include_unit, prec)


Model = GramPi
