"""
Cipolla's 1902 expansion of the n-th prime.

p(n) ~ n (ln n + ln ln n - 1 + (ln ln n - 2)/ln n
          - ((ln ln n)^2 - 6 ln ln n + 11)/(2 (ln n)^2) + ...)

``num_terms`` counts the displayed terms in that order.
"""

from typing import Optional

import mpmath
from mpmath import mp
from pydantic import BaseModel, Field

from ..config import DEFAULT_PRECISION, GUARD_DIGITS
from ..errors import DomainError
from ..precision_core import HPReal, check_precision
from .base import EstimatorId, PrimeEstimator

MAX_TERMS = 5


def cipolla_pn(n: int, num_terms: int = MAX_TERMS, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    n times the first ``num_terms`` terms of Cipolla's expansion.

    Raises:
        DomainError: For n <= 3 or num_terms outside 1..5
    """
    if n <= 3:
        raise DomainError(f"cipolla_pn requires n >= 4 (ln ln n > 0), got {n}")
    if not 1 <= num_terms <= MAX_TERMS:
        raise DomainError(f"num_terms must be in 1..{MAX_TERMS}, got {num_terms}")
    check_precision(prec)
    with mp.workdps(prec + GUARD_DIGITS):
        l1 = mpmath.log(n)
        l2 = mpmath.log(l1)
        terms = [
            l1,
            l2,
            mpmath.mpf(-1),
            (l2 - 2) / l1,
            -(l2**2 - 6 * l2 + 11) / (2 * l1**2),
        ]
        value = n * mpmath.fsum(terms[:num_terms])
    with mp.workdps(prec):
        return +value


class CipollaParams(BaseModel):
    """Parameters for CipollaPn."""
    num_terms: int = Field(default=MAX_TERMS, ge=1, le=MAX_TERMS)


class CipollaPn(PrimeEstimator[CipollaParams]):
    """Cipolla's asymptotic expansion of p(n)."""

    id = EstimatorId.CIPOLLA_PN
    truth = "p_n"

    @staticmethod
    def evaluate(n: int, params: Optional[CipollaParams] = None, *, pi_n=None, model=None,
                 prec: int = DEFAULT_PRECISION) -> HPReal:
        params = params or CipollaParams()
        return cipolla_pn(n, params.num_terms, prec)


# Alias for the estimator class
Model = CipollaPn
