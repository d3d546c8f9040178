"""pi(n) ~ n / W0(n), the Lambert W member of the closeness chain."""

from typing import Optional

from mpmath import mp

from ..config import DEFAULT_PRECISION, GUARD_DIGITS
from ..errors import DomainError
from ..precision_core import HPReal, Number, WBranch, check_precision, lambert_w, to_hpreal
from .base import EstimatorId, NoParams, PrimeEstimator


def n_over_w(n: Number, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    n / W0(n).

    Raises:
        DomainError: For n < 2
    """
    check_precision(prec)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        x = to_hpreal(n, work)
        # e itself is allowed as an exact check point: W0(e) = 1
        if x < 2:
            raise DomainError(f"n_over_w requires n >= 2, got {n}")
        value = x / lambert_w(WBranch.PRINCIPAL, x, work)
    with mp.workdps(prec):
        return +value


class NOverW(PrimeEstimator[NoParams]):
    id = EstimatorId.N_OVER_W
    truth = "pi_n"

    @staticmethod
    def evaluate(n: int, params: Optional[NoParams] = None, *, pi_n=None, model=None,
                 prec: int = DEFAULT_PRECISION) -> HPReal:
        return n_over_w(n, prec)


Model = NOverW
