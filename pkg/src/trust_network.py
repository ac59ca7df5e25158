from __future__ import annotations

"""Seeded generators for signed trust matrices, plus CSV import/export.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``. Draw order
is fixed: connection mask (sparse topology only), weights, then distrust
flips, each as a full N x N array in row-major order.
"""

import logging
from pathlib import Path
from typing import Annotated, Optional, Tuple, Union, Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.dynamics_engine import TrustMatrix
from src.errors import ConfigurationError, FormatError

__all__ = [
    "CompleteTopology",
    "RandomSparseTopology",
    "ConstantWeights",
    "UniformWeights",
    "SignedMixWeights",
    "Factions",
    "TrustGenSpec",
    "generate_trust",
    "symmetrized",
    "write_trust_csv",
    "read_trust_csv",
]

MAX_SEED = 2**64 - 1


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False, extra="forbid")


class CompleteTopology(_Frozen):
    kind: Literal["complete"] = "complete"


class RandomSparseTopology(_Frozen):
    kind: Literal["random_sparse"] = "random_sparse"
    connection_probability: float = Field(ge=0, le=1)


class ConstantWeights(_Frozen):
    kind: Literal["constant"] = "constant"
    value: float


class UniformWeights(_Frozen):
    kind: Literal["uniform"] = "uniform"
    lo: float
    hi: float

    @model_validator(mode="after")
    def _ordered(self) -> "UniformWeights":
        if self.hi < self.lo:
            raise ValueError("hi must not be below lo")
        return self


class SignedMixWeights(_Frozen):
    """Magnitudes uniform on [magnitude_lo, magnitude_hi], each negated with probability distrust_fraction."""

    kind: Literal["signed_mix"] = "signed_mix"
    magnitude_lo: float = Field(ge=0)
    magnitude_hi: float = Field(ge=0)
    distrust_fraction: float = Field(ge=0, le=1)

    @model_validator(mode="after")
    def _ordered(self) -> "SignedMixWeights":
        if self.magnitude_hi < self.magnitude_lo:
            raise ValueError("magnitude_hi must not be below magnitude_lo")
        return self


class Factions(_Frozen):
    """Two camps: agents ``0..n1-1`` and ``n1..n1+n2-1``."""

    sizes: Tuple[int, int]
    intra_weight: float
    inter_weight: float

    @model_validator(mode="after")
    def _non_negative(self) -> "Factions":
        if min(self.sizes) < 0:
            raise ValueError("faction sizes must be non-negative")
        return self


Topology = Annotated[Union[CompleteTopology, RandomSparseTopology], Field(discriminator="kind")]
WeightLaw = Annotated[
    Union[ConstantWeights, UniformWeights, SignedMixWeights], Field(discriminator="kind")
]


class TrustGenSpec(_Frozen):
    """Recipe for a trust matrix. Exactly one of ``weight_law`` and ``factions`` sets the weights."""

    n_agents: int = Field(ge=1)
    topology: Topology = Field(default_factory=CompleteTopology)
    weight_law: Optional[WeightLaw] = None
    factions: Optional[Factions] = None
    seed: int = Field(ge=0, le=MAX_SEED)

    @model_validator(mode="after")
    def _consistent(self) -> "TrustGenSpec":
        if (self.weight_law is None) == (self.factions is None):
            raise ValueError("exactly one of weight_law or factions must be given")
        if self.factions is not None and sum(self.factions.sizes) != self.n_agents:
            raise ValueError(
                f"faction sizes {self.factions.sizes} do not sum to n_agents={self.n_agents}"
            )
        return self


def generate_trust(spec: TrustGenSpec) -> TrustMatrix:
    if not isinstance(spec, TrustGenSpec):
        try:
            spec = TrustGenSpec.model_validate(spec)
        except ValidationError as exc:
            raise ConfigurationError(str(exc)) from exc

    n = spec.n_agents
    rng = np.random.Generator(np.random.PCG64(spec.seed))

    if isinstance(spec.topology, RandomSparseTopology):
        connected = rng.random((n, n)) < spec.topology.connection_probability
    else:
        connected = np.ones((n, n), dtype=bool)

    if spec.factions is not None:
        camp = np.arange(n) >= spec.factions.sizes[0]
        same_camp = camp[:, None] == camp[None, :]
        weights = np.where(same_camp, spec.factions.intra_weight, spec.factions.inter_weight)
    else:
        law = spec.weight_law
        if isinstance(law, ConstantWeights):
            weights = np.full((n, n), law.value)
        elif isinstance(law, UniformWeights):
            weights = rng.uniform(law.lo, law.hi, size=(n, n))
        else:
            magnitude = rng.uniform(law.magnitude_lo, law.magnitude_hi, size=(n, n))
            distrust = rng.random((n, n)) < law.distrust_fraction
            weights = np.where(distrust, -magnitude, magnitude)

    weights = np.where(connected, weights, 0.0)
    trust = TrustMatrix(weights)

    off_diagonal = trust.weights[~np.eye(n, dtype=bool)]
    logging.info(
        f"[Trust] Generated {n}x{n} matrix (seed={spec.seed}): "
        f"{int(np.sum(off_diagonal > 0))} trusting, {int(np.sum(off_diagonal < 0))} distrusting links"
    )
    return trust


def symmetrized(trust: TrustMatrix) -> TrustMatrix:
    """Mirror the upper triangle onto the lower one so that ``D_ji = D_ij``."""

    upper = np.triu(trust.weights, k=1)
    return TrustMatrix(upper + upper.T)


def write_trust_csv(trust: TrustMatrix, path: str | Path) -> None:
    """Row-major CSV with header ``agent,0,1,...``; row i holds the influences on agent i."""

    n = trust.n_agents
    frame = pd.DataFrame(trust.weights, columns=[str(k) for k in range(n)])
    frame.to_csv(path, index=True, index_label="agent", lineterminator="\n")


def read_trust_csv(path: str | Path) -> TrustMatrix:
    try:
        frame = pd.read_csv(path, index_col=0, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as exc:
        raise FormatError(f"Could not read trust matrix {path}: {exc}") from exc

    n = len(frame)
    expected = [str(k) for k in range(n)]
    if list(frame.columns) != expected or list(frame.index) != list(range(n)):
        raise FormatError(f"{path}: header and row labels must be agent indices 0..{n - 1}")

    try:
        weights = frame.to_numpy(dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: trust weights must be numeric ({exc})") from exc
    if np.any(np.diag(weights) != 0):
        logging.warning(f"[Trust] {path}: non-zero self-trust on the diagonal ignored")
    try:
        return TrustMatrix(weights)
    except ConfigurationError as exc:
        raise FormatError(f"{path}: {exc}") from exc
