from __future__ import annotations

"""JSON experiment configuration.

Every physics parameter (alpha, beta, b, dt, epsilon) is a required field.
Relative paths are resolved against the directory of the config file.
See ``configs/`` for complete samples.
"""

from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_core import PydanticCustomError

from src.errors import ConfigurationError
from src.media_signal import (
    CouplingLaw,
    MediaSignal,
    PerAgentCoupling,
    ZeroSignal,
)
from src.trust_network import MAX_SEED, Factions, Topology, CompleteTopology, WeightLaw

__all__ = [
    "ExperimentConfig",
    "load_config",
    "format_validation_error",
    "derive_seed",
    "OPINION_STREAM",
    "TRUST_STREAM",
]

# Stream ids mixed with the global seed for fields that carry no seed of their own.
OPINION_STREAM = 1
TRUST_STREAM = 2


class _Strict(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False, extra="forbid")


class ClassicModelConfig(_Strict):
    kind: Literal["classic"]
    epsilon: float = Field(gt=0)


class ExtendedModelConfig(_Strict):
    kind: Literal["extended"]
    alpha: float = Field(ge=0)
    beta: float = Field(gt=0)
    b: float = Field(gt=0)
    dt: float = Field(gt=0)


ModelConfig = Annotated[Union[ClassicModelConfig, ExtendedModelConfig], Field(discriminator="kind")]


class UniformOpinions(_Strict):
    kind: Literal["uniform"]
    lo: float
    hi: float
    seed: Optional[int] = Field(default=None, ge=0, le=MAX_SEED)

    @model_validator(mode="after")
    def _ordered(self) -> "UniformOpinions":
        if self.hi < self.lo:
            raise ValueError("hi must not be below lo")
        return self


class ExplicitOpinions(_Strict):
    kind: Literal["explicit"]
    values: List[float] = Field(min_length=1)


class TwoCampsOpinions(_Strict):
    """``n1`` agents around ``center1`` and ``n2`` around ``center2``, offsets uniform in ±jitter."""

    kind: Literal["two_camps"]
    n1: int = Field(ge=0)
    center1: float
    n2: int = Field(ge=0)
    center2: float
    jitter: float = Field(ge=0)
    seed: Optional[int] = Field(default=None, ge=0, le=MAX_SEED)


InitialOpinions = Annotated[
    Union[UniformOpinions, ExplicitOpinions, TwoCampsOpinions], Field(discriminator="kind")
]


class AgentsConfig(_Strict):
    count: int = Field(ge=1)
    initial_opinions: InitialOpinions

    @model_validator(mode="after")
    def _sized(self) -> "AgentsConfig":
        init = self.initial_opinions
        if isinstance(init, ExplicitOpinions) and len(init.values) != self.count:
            raise ValueError(f"initial_opinions.values has {len(init.values)} entries for count={self.count}")
        if isinstance(init, TwoCampsOpinions) and init.n1 + init.n2 != self.count:
            raise ValueError(f"initial_opinions n1 + n2 = {init.n1 + init.n2} but count={self.count}")
        return self


class GeneratedTrust(_Strict):
    source: Literal["generate"]
    topology: Topology = Field(default_factory=CompleteTopology)
    weight_law: Optional[WeightLaw] = None
    factions: Optional[Factions] = None
    seed: Optional[int] = Field(default=None, ge=0, le=MAX_SEED)


class CsvTrust(_Strict):
    source: Literal["csv"]
    path: str = Field(min_length=1)


TrustConfig = Annotated[Union[GeneratedTrust, CsvTrust], Field(discriminator="source")]


class MediaConfig(_Strict):
    signal: MediaSignal = Field(default_factory=ZeroSignal)
    coupling: CouplingLaw


class RunConfig(_Strict):
    max_steps: int = Field(ge=0)
    tolerance: float = Field(ge=0)
    record_every: int = Field(default=1, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)


class HistogramConfig(_Strict):
    lo: float
    hi: float
    n_bins: int = Field(ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "HistogramConfig":
        if not self.lo < self.hi:
            raise ValueError("histogram lo must be below hi")
        return self


class OutputsConfig(_Strict):
    histogram: HistogramConfig
    cluster_gap_threshold: Optional[float] = Field(default=None, gt=0)
    trajectory_path: Optional[str] = Field(default=None, min_length=1)
    histogram_path: Optional[str] = Field(default=None, min_length=1)
    clusters_path: Optional[str] = Field(default=None, min_length=1)
    clusters_csv_path: Optional[str] = Field(default=None, min_length=1)
    summary_path: Optional[str] = Field(default=None, min_length=1)
    compare_against: Optional[str] = Field(default=None, min_length=1)
    comparison_histogram_path: Optional[str] = Field(default=None, min_length=1)


class ExperimentConfig(_Strict):
    model: ModelConfig
    agents: AgentsConfig
    trust: Optional[TrustConfig] = None
    media: Optional[MediaConfig] = None
    run: RunConfig
    outputs: OutputsConfig
    seed: int = Field(default=0, ge=0, le=MAX_SEED)

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        problems = []
        n = self.agents.count
        if isinstance(self.model, ClassicModelConfig):
            if self.trust is not None:
                problems.append("trust: only the extended model takes a trust matrix")
            if self.media is not None:
                problems.append("media: only the extended model takes media pressure")
            if self.outputs.cluster_gap_threshold is None:
                problems.append("outputs.cluster_gap_threshold: required for the classic model")
        else:
            if self.trust is None:
                problems.append("trust: required for the extended model")
            if self.media is not None and isinstance(self.media.coupling, PerAgentCoupling):
                if len(self.media.coupling.values) != n:
                    problems.append(
                        f"media.coupling.values: {len(self.media.coupling.values)} entries for {n} agents"
                    )
        if isinstance(self.trust, GeneratedTrust):
            if (self.trust.weight_law is None) == (self.trust.factions is None):
                problems.append("trust: exactly one of weight_law or factions must be given")
            if self.trust.factions is not None and sum(self.trust.factions.sizes) != n:
                problems.append(
                    f"trust.factions.sizes: {list(self.trust.factions.sizes)} do not sum to agents.count={n}"
                )
        if problems:
            raise PydanticCustomError(
                "cross_field", "{summary}", {"summary": "; ".join(problems), "problems": problems}
            )
        return self

    def gap_threshold(self) -> float:
        """Explicit threshold, else half the extended model's confidence bound."""

        if self.outputs.cluster_gap_threshold is not None:
            return self.outputs.cluster_gap_threshold
        return self.model.b / 2


def format_validation_error(exc: ValidationError) -> List[str]:
    lines = []
    for err in exc.errors():
        if err["type"] == "cross_field":
            lines.extend(err["ctx"]["problems"])
            continue
        path = ".".join(str(part) for part in err["loc"])
        lines.append(f"{path}: {err['msg']}" if path else err["msg"])
    return lines


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a config file; raises ConfigurationError listing every violation."""

    text = Path(path).read_text(encoding="utf-8")
    try:
        return ExperimentConfig.model_validate_json(text)
    except ValidationError as exc:
        raise ConfigurationError("\n".join(format_validation_error(exc))) from exc


def derive_seed(global_seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([global_seed, stream]).generate_state(1, dtype=np.uint64)[0])
