"""
The uncorrected Lambert W estimator p(n) ~ -n W-1(-e/n).

If pi(x) ~ x / (ln x - 1), solving p / (ln p - 1) = n for p gives exactly
-n W-1(-e/n), so this is the functional inverse of dusart_pi. The value
tracks p(n) + pi(n) more closely than p(n) alone; ``w_rest_pn`` subtracts
the n / W0(n) stand-in for pi(n).
"""

from typing import Optional

from mpmath import mp
from pydantic import BaseModel

from ..config import DEFAULT_PRECISION, GUARD_DIGITS
from ..errors import DomainError
from ..precision_core import HPReal, Number, WBranch, check_precision, lambert_w, to_hpreal
from .base import EstimatorId, PrimeEstimator

# -e/n >= -1/e needs n >= e^2
BASE_W_MIN_N = 8


def base_w_term(x: HPReal, work: int) -> HPReal:
    """|-x W-1(-e/x)| at ``work`` digits, unrounded. Caller checks the domain."""
    with mp.workdps(work):
        return abs(-x * lambert_w(WBranch.MINUS_ONE, -mp.e / x, work))


def _checked(n: Number, work: int, operation: str) -> HPReal:
    x = to_hpreal(n, work)
    if x < BASE_W_MIN_N:
        raise DomainError(f"{operation} requires n >= {BASE_W_MIN_N} (W-1 domain), got {n}")
    return x


def base_w_pn(n: Number, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    -n W-1(-e/n).

    Raises:
        DomainError: For n < 8
    """
    check_precision(prec)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        value = base_w_term(_checked(n, work, "base_w_pn"), work)
    with mp.workdps(prec):
        return +value


def w_rest_pn(n: Number, prec: int = DEFAULT_PRECISION) -> HPReal:
    """-n W-1(-e/n) - n / W0(n): p(n) without needing pi(n)."""
    check_precision(prec)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        x = _checked(n, work, "w_rest_pn")
        value = base_w_term(x, work) - x / lambert_w(WBranch.PRINCIPAL, x, work)
    with mp.workdps(prec):
        return +value


class BaseWParams(BaseModel):
    """Parameters for BaseWPn."""
    subtract_rest: bool = False


class BaseWPn(PrimeEstimator[BaseWParams]):
    """p(n) by -n W-1(-e/n), optionally minus n / W0(n)."""

    id = EstimatorId.BASE_W_PN
    truth = "p_n"

    @staticmethod
    def evaluate(n: int, params: Optional[BaseWParams] = None, *, pi_n=None, model=None,
                 prec: int = DEFAULT_PRECISION) -> HPReal:
        params = params or BaseWParams()
        if params.subtract_rest:
            return w_rest_pn(n, prec)
        return base_w_pn(n, prec)


# Alias for the estimator class
Model = BaseWPn
