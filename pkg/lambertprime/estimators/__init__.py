from .base import Estimate, EstimatorId, PrimeEstimator, ProgressInfo
from .base_w_pn import base_w_pn, w_rest_pn
from .cipolla_pn import cipolla_pn
from .dusart_pi import dusart_pi
from .gram_inverse_pn import gram_inverse
from .gram_pi import gram_pi
from .li_pi import li_pi
from .n_over_w import n_over_w

__all__ = [
    "Estimate",
    "EstimatorId",
    "PrimeEstimator",
    "ProgressInfo",
    "base_w_pn",
    "cipolla_pn",
    "dusart_pi",
    "gram_inverse",
    "gram_pi",
    "li_pi",
    "n_over_w",
    "w_rest_pn",
]
