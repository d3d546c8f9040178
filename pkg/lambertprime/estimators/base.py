"""
Abstract base class for prime estimators.

Every estimator module defines a pydantic ``Params`` model, a subclass of
PrimeEstimator parameterised by it, and a ``Model`` alias for the class.
"""

from abc import ABC, abstractmethod
from enum import StrEnum
from typing import Any, ClassVar, Dict, Generic, Literal, Optional, Type, TypeVar, TypedDict, TYPE_CHECKING

from pydantic import BaseModel

from ..config import DEFAULT_PRECISION
from ..errors import DomainError
from ..precision_core import HPReal

if TYPE_CHECKING:
    from ..plouffe_model import CorrectionModel


class EstimatorId(StrEnum):
    """Closed set of estimator names; each is a module of this package."""

    DUSART_PI = "dusart_pi"
    LI_PI = "li_pi"
    N_OVER_W = "n_over_w"
    GRAM_PI = "gram_pi"
    GRAM_INVERSE_PN = "gram_inverse_pn"
    CIPOLLA_PN = "cipolla_pn"
    BASE_W_PN = "base_w_pn"
    PLOUFFE_G = "plouffe_g"
    PLOUFFE_F = "plouffe_f"


class Estimate(TypedDict):
    """A single evaluated estimate."""

    input_n: int
    value: HPReal
    estimator: EstimatorId
    flags: list[str]


class ProgressInfo(TypedDict):
    """Progress information for long-running callbacks."""

    percentage: float
    round: int
    total_rounds: int
    metrics: Dict[str, Any]
    params: Dict[str, Any]


class NoParams(BaseModel):
    """Parameter model for estimators without knobs."""


# Type variable for parameter model type
ParamsType = TypeVar("ParamsType", bound=BaseModel)


class PrimeEstimator(ABC, Generic[ParamsType]):
    """
    Abstract base class for estimators of pi(n) or of the n-th prime.

    Type Parameters:
        ParamsType: The pydantic parameter model accepted by ``evaluate``
    """

    id: ClassVar[EstimatorId]
    # Which column of a prime table this estimator predicts
    truth: ClassVar[Literal["pi_n", "p_n"]]
    needs_pi: ClassVar[bool] = False

    @staticmethod
    @abstractmethod
    def evaluate(
        n: int,
        params: Optional[ParamsType] = None,
        *,
        pi_n: Optional[int] = None,
        model: Optional["CorrectionModel"] = None,
        prec: int = DEFAULT_PRECISION,
    ) -> HPReal:
        """
        Evaluate the estimator at n.

        Args:
            n: Exact integer input
            params: Optional parameter model; defaults apply when None
            pi_n: pi(n), only read by estimators with ``needs_pi``
            model: Correction model override, only read by correction estimators
            prec: Significant decimal digits

        Returns:
            The estimate as HPReal
        """
        pass

    @classmethod
    def flags(cls, n: int) -> list[str]:
        """Notes attached to an estimate at n (e.g. outside a proven regime)."""
        return []

    @classmethod
    def requires_pi(cls, params: Optional[ParamsType] = None, model: Optional["CorrectionModel"] = None) -> bool:
        """Whether evaluate needs pi(n) for these params and model."""
        return cls.needs_pi

    @classmethod
    def params_class(cls) -> Type[BaseModel]:
        """Extract the Params model from the class's generic base."""
        for base in getattr(cls, '__orig_bases__', ()):
            args = getattr(base, '__args__', ())
            if args:
                return args[0]
        return NoParams

    @classmethod
    def estimate(
        cls,
        n: int,
        params: Optional[ParamsType] = None,
        *,
        pi_n: Optional[int] = None,
        model: Optional["CorrectionModel"] = None,
        prec: int = DEFAULT_PRECISION,
    ) -> Estimate:
        """Evaluate and wrap the result as an Estimate."""
        if pi_n is None and cls.requires_pi(params, model):
            raise DomainError(f"{cls.id} needs pi(n) as input")
        value = cls.evaluate(n, params, pi_n=pi_n, model=model, prec=prec)
        if not value > 0:
            raise DomainError(f"{cls.id} produced a non-positive estimate at n={n}")
        return {
            'input_n': n,
            'value': value,
            'estimator': cls.id,
            'flags': cls.flags(n),
        }
