from __future__ import annotations

"""Per-pair interaction math of the trust/suspicion bounded-confidence model.

The cutoff ``phi`` suppresses interaction between agents whose opinions differ
by more than ``b``; ``coupling_term`` is the signed pull (or push) that agent
``j`` exerts on agent ``i``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.errors import InputDomainError

__all__ = [
    "ModelParams",
    "OpinionState",
    "phi",
    "phi_matrix",
    "coupling_term",
]


class ModelParams(BaseModel):
    """Parameters of the extended update. No defaults: every run states them."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    alpha: float = Field(ge=0, description="attenuation rate per unit time")
    beta: float = Field(gt=0, description="steepness of the cutoff sigmoid")
    b: float = Field(gt=0, description="confidence bound (cutoff distance)")
    dt: float = Field(gt=0, description="time step")


@dataclass(frozen=True, eq=False)
class OpinionState:
    """Opinions of all agents at ``step_index``. Opinions are unbounded but finite."""

    opinions: np.ndarray
    step_index: int = 0
    n_agents: int = field(init=False)

    def __post_init__(self):
        values = np.array(self.opinions, dtype=np.float64).reshape(-1)
        if values.size < 1:
            raise InputDomainError("OpinionState needs at least one agent")
        if not np.all(np.isfinite(values)):
            raise InputDomainError("OpinionState opinions must all be finite")
        if self.step_index < 0:
            raise InputDomainError("step_index must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "opinions", values)
        object.__setattr__(self, "n_agents", int(values.size))


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise InputDomainError(f"{name} must be finite, got {value!r}")


def phi(distance: float, params: ModelParams) -> float:
    """Smooth cutoff ``1 / (1 + exp(beta * (distance - b)))``.

    Evaluated through ``exp(-|x|)`` so large exponents underflow to 0.0
    instead of overflowing.

    >>> round(phi(0.0, ModelParams(alpha=0, beta=10, b=1, dt=1)), 7)
    0.9999546
    """

    _check_finite(distance=distance)
    if distance < 0:
        raise InputDomainError(f"distance must be non-negative, got {distance!r}")

    x = params.beta * (distance - params.b)
    e = math.exp(-abs(x))
    if x > 0:
        return e / (1.0 + e)
    return 1.0 / (1.0 + e)


def phi_matrix(distances: np.ndarray, params: ModelParams) -> np.ndarray:
    """Elementwise ``phi`` over an array of non-negative distances."""

    distances = np.asarray(distances, dtype=np.float64)
    if not np.all(np.isfinite(distances)):
        raise InputDomainError("distances must be finite")
    if np.any(distances < 0):
        raise InputDomainError("distances must be non-negative")

    x = params.beta * (distances - params.b)
    e = np.exp(-np.abs(x))
    return np.where(x > 0, e / (1.0 + e), 1.0 / (1.0 + e))


def coupling_term(i_opinion: float, j_opinion: float, trust: float, params: ModelParams) -> float:
    """Influence of agent j on agent i: ``D_ij * phi(|I_i - I_j|) * (I_j - I_i)``.

    Positive trust attracts, negative trust repels; identical opinions give 0.
    """

    _check_finite(i_opinion=i_opinion, j_opinion=j_opinion, trust=trust)
    diff = j_opinion - i_opinion
    return trust * phi(abs(diff), params) * diff
