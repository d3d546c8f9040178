"""Polynomial-corrected estimator F(n, pi(n)) for 1e16 <= n <= 1e24."""

from typing import Optional

from ..config import DEFAULT_PRECISION
from ..precision_core import HPReal
from .base import EstimatorId, NoParams, PrimeEstimator


class PlouffeF(PrimeEstimator[NoParams]):
    id = EstimatorId.PLOUFFE_F
    truth = "p_n"
    needs_pi = True

    @staticmethod
    def evaluate(n: int, params: Optional[NoParams] = None, *, pi_n: Optional[int] = None,
                 model=None, prec: int = DEFAULT_PRECISION) -> HPReal:
        from ..plouffe_model import f_poly_pn

        return f_poly_pn(n, pi_n, prec)


Model = PlouffeF
