from __future__ import annotations

"""External media pressure A(t) on the step grid and the per-agent response c_i."""

from bisect import bisect_right
from dataclasses import dataclass
from typing import Annotated, List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import ConfigurationError

__all__ = [
    "ZeroSignal",
    "ConstantSignal",
    "PulseSignal",
    "PiecewiseSegment",
    "PiecewiseSignal",
    "MediaSignal",
    "MediaCoupling",
    "ConstantCoupling",
    "PerAgentCoupling",
    "SignedSplitCoupling",
    "CouplingLaw",
    "evaluate",
    "build_coupling",
]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False, extra="forbid")


class ZeroSignal(_Frozen):
    kind: Literal["zero"] = "zero"


class ConstantSignal(_Frozen):
    kind: Literal["constant"] = "constant"
    level: float


class PulseSignal(_Frozen):
    """``level`` on the half-open step interval [start_step, end_step), 0 elsewhere."""

    kind: Literal["pulse"] = "pulse"
    level: float
    start_step: int = Field(ge=0)
    end_step: int = Field(ge=0)

    @model_validator(mode="after")
    def _ordered(self) -> "PulseSignal":
        if self.end_step < self.start_step:
            raise ValueError("end_step must not precede start_step")
        return self


class PiecewiseSegment(_Frozen):
    start_step: int = Field(ge=0)
    level: float


class PiecewiseSignal(_Frozen):
    kind: Literal["piecewise"] = "piecewise"
    segments: List[PiecewiseSegment]

    @model_validator(mode="after")
    def _increasing(self) -> "PiecewiseSignal":
        starts = [seg.start_step for seg in self.segments]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start steps must be strictly increasing")
        return self


MediaSignal = Annotated[
    Union[ZeroSignal, ConstantSignal, PulseSignal, PiecewiseSignal],
    Field(discriminator="kind"),
]


def evaluate(signal: MediaSignal, step_index: int) -> float:
    """Return A at ``step_index``."""

    if step_index < 0:
        raise ValueError("step_index must be non-negative")

    if isinstance(signal, ZeroSignal):
        return 0.0
    if isinstance(signal, ConstantSignal):
        return signal.level
    if isinstance(signal, PulseSignal):
        return signal.level if signal.start_step <= step_index < signal.end_step else 0.0
    if isinstance(signal, PiecewiseSignal):
        starts = [seg.start_step for seg in signal.segments]
        pos = bisect_right(starts, step_index) - 1
        return signal.segments[pos].level if pos >= 0 else 0.0
    raise TypeError(f"Unknown media signal: {type(signal).__name__}")


@dataclass(frozen=True, eq=False)
class MediaCoupling:
    """Per-agent response to media pressure; positive follows it, negative reacts against it."""

    c: np.ndarray

    def __post_init__(self):
        values = np.array(self.c, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("media coupling coefficients must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "c", values)

    @classmethod
    def zeros(cls, n_agents: int) -> "MediaCoupling":
        return cls(np.zeros(n_agents))

    def __len__(self) -> int:
        return int(self.c.size)


# Coupling laws as they appear in experiment configs


class ConstantCoupling(_Frozen):
    kind: Literal["constant"] = "constant"
    c: float


class PerAgentCoupling(_Frozen):
    kind: Literal["per_agent"] = "per_agent"
    values: List[float]


class SignedSplitCoupling(_Frozen):
    """The last ``round(against_fraction * N)`` agents get ``-magnitude``, the rest ``+magnitude``."""

    kind: Literal["signed_split"] = "signed_split"
    magnitude: float
    against_fraction: float = Field(ge=0, le=1)


CouplingLaw = Annotated[
    Union[ConstantCoupling, PerAgentCoupling, SignedSplitCoupling],
    Field(discriminator="kind"),
]


def build_coupling(law: CouplingLaw, n_agents: int) -> MediaCoupling:
    if isinstance(law, ConstantCoupling):
        return MediaCoupling(np.full(n_agents, law.c))
    if isinstance(law, PerAgentCoupling):
        if len(law.values) != n_agents:
            raise ConfigurationError(
                f"per-agent coupling has {len(law.values)} values for {n_agents} agents"
            )
        return MediaCoupling(np.array(law.values))
    if isinstance(law, SignedSplitCoupling):
        n_against = int(round(law.against_fraction * n_agents))
        c = np.full(n_agents, law.magnitude)
        if n_against:
            c[n_agents - n_against :] = -law.magnitude
        return MediaCoupling(c)
    raise TypeError(f"Unknown coupling law: {type(law).__name__}")
