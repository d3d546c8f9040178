"""
Corrected Lambert W estimator G(n, pi(n)) backed by a correction model.
"""

from typing import Optional

from pydantic import BaseModel

from ..config import DEFAULT_G_MODEL, DEFAULT_PRECISION
from ..precision_core import HPReal
from .base import EstimatorId, PrimeEstimator


class PlouffeGParams(BaseModel):
    """Parameters for PlouffeG."""
    # shipped model name or path to a model file
    model: str = DEFAULT_G_MODEL


class PlouffeG(PrimeEstimator[PlouffeGParams]):
    """p(n) = |-n W-1(-e/n)| c(n) s^k - pi(n) and its model-form variants."""

    id = EstimatorId.PLOUFFE_G
    truth = "p_n"
    needs_pi = True

    @staticmethod
    def _model(params: Optional[PlouffeGParams], model):
        from ..plouffe_model import resolve_model

        return model if model is not None else resolve_model((params or PlouffeGParams()).model)

    @classmethod
    def requires_pi(cls, params: Optional[PlouffeGParams] = None, model=None) -> bool:
        from ..plouffe_model import CorrectionForm

        # w0-form models replace pi(n) by n / W0(n)
        return cls._model(params, model).form is not CorrectionForm.W0

    @staticmethod
    def evaluate(n: int, params: Optional[PlouffeGParams] = None, *, pi_n: Optional[int] = None,
                 model=None, prec: int = DEFAULT_PRECISION) -> HPReal:
        from ..plouffe_model import corrected_pn

        return corrected_pn(n, pi_n, PlouffeG._model(params, model), prec)


# Alias for the estimator class
Model = PlouffeG
