"""pi(n) by the logarithmic integral Li(n)."""

from typing import Optional

from ..config import DEFAULT_PRECISION
from ..precision_core import HPReal, li
from .base import EstimatorId, NoParams, PrimeEstimator


def li_pi(n: int, prec: int = DEFAULT_PRECISION) -> HPReal:
    return li(n, prec)


class LiPi(PrimeEstimator[NoParams]):
    id = EstimatorId.LI_PI
    truth = "pi_n"

    @staticmethod
    def evaluate(n: int, params: Optional[NoParams] = None, *, pi_n=None, model=None,
                 prec: int = DEFAULT_PRECISION) -> HPReal:
        return li_pi(n, prec)


Model = LiPi
