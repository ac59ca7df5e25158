from __future__ import annotations

"""Synchronous time stepping of the classic bounded-confidence model and of
the extended trust/suspicion model with media pressure and attenuation.

Both step functions read only the previous state. Rows (influenced agents)
are processed in fixed-size blocks, optionally on a thread pool; the sum over
influencing agents is accumulated strictly left to right, so the result does
not depend on how many workers were used.
"""

import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.errors import ConfigurationError, DivergenceError, InputDomainError
from src.media_signal import MediaCoupling, MediaSignal, ZeroSignal, evaluate
from src.model_core import ModelParams, OpinionState, phi_matrix

__all__ = [
    "TrustMatrix",
    "ClassicHkParams",
    "ClassicModelSpec",
    "ExtendedModelSpec",
    "ModelSpec",
    "RunSchedule",
    "SimulationResult",
    "hk_classic_step",
    "extended_step",
    "run_simulation",
    "trajectory_frame",
]

# Rows per work unit. Fixed so that every block has the same shape whatever the
# worker count.
ROW_BLOCK = 64


@dataclass(frozen=True, eq=False)
class TrustMatrix:
    """Signed, generally asymmetric trust ``D[i, j]``: influence of agent j on agent i."""

    weights: np.ndarray
    n_agents: int = field(init=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ConfigurationError(f"trust matrix must be square and non-empty, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ConfigurationError("trust matrix entries must be finite")
        # Self-trust is not part of the model.
        np.fill_diagonal(w, 0.0)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "n_agents", int(w.shape[0]))


class ClassicHkParams(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    epsilon: float = Field(gt=0, description="confidence bound of the classic model")


@dataclass(frozen=True)
class ClassicModelSpec:
    hk: ClassicHkParams


@dataclass(frozen=True, eq=False)
class ExtendedModelSpec:
    params: ModelParams
    trust: TrustMatrix
    coupling: MediaCoupling


ModelSpec = Union[ClassicModelSpec, ExtendedModelSpec]


@dataclass(frozen=True)
class RunSchedule:
    """Stopping rule, recording cadence, media forcing and per-step parallelism."""

    max_steps: int
    tolerance: float
    record_every: int = 1
    media: MediaSignal = field(default_factory=ZeroSignal)
    workers: int = 1

    def __post_init__(self):
        if self.max_steps < 0:
            raise ConfigurationError("max_steps must be non-negative")
        if not np.isfinite(self.tolerance) or self.tolerance < 0:
            raise ConfigurationError("tolerance must be finite and non-negative")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be at least 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")


@dataclass(eq=False)
class SimulationResult:
    trajectory: List[OpinionState]
    final_state: OpinionState
    converged: bool
    steps_taken: int


def _ordered_row_sum(terms: np.ndarray) -> np.ndarray:
    # cumsum accumulates each row sequentially in ascending column order.
    return np.cumsum(terms, axis=1)[:, -1]


def _map_row_blocks(
    n_rows: int,
    compute: Callable[[int, int], np.ndarray],
    executor: Optional[Executor],
) -> np.ndarray:
    bounds = [(lo, min(lo + ROW_BLOCK, n_rows)) for lo in range(0, n_rows, ROW_BLOCK)]
    if executor is None or len(bounds) == 1:
        parts = [compute(lo, hi) for lo, hi in bounds]
    else:
        parts = list(executor.map(lambda b: compute(*b), bounds))
    return np.concatenate(parts)


def hk_classic_step(
    state: OpinionState,
    hk: ClassicHkParams,
    *,
    executor: Optional[Executor] = None,
) -> OpinionState:
    """Average every agent over all agents within ``epsilon`` (bound inclusive, self included).

    >>> hk_classic_step(OpinionState([0.0, 1.0]), ClassicHkParams(epsilon=1)).opinions.tolist()
    [0.5, 0.5]
    """

    opinions = state.opinions

    def compute(lo: int, hi: int) -> np.ndarray:
        own = opinions[lo:hi, None]
        neighbours = np.abs(opinions[None, :] - own) <= hk.epsilon
        sums = _ordered_row_sum(np.where(neighbours, opinions[None, :], 0.0))
        return sums / neighbours.sum(axis=1)

    new = _map_row_blocks(opinions.size, compute, executor)
    return OpinionState(new, state.step_index + 1)


def extended_step(
    state: OpinionState,
    trust: TrustMatrix,
    params: ModelParams,
    coupling: MediaCoupling,
    a_t: float,
    *,
    executor: Optional[Executor] = None,
) -> OpinionState:
    """One forward-Euler step of the extended model.

    ``I_i += dt * (-alpha*I_i + c_i*A + sum_j D_ij * phi(|I_i - I_j|) * (I_j - I_i))``
    """

    n = state.n_agents
    if trust.n_agents != n:
        raise ConfigurationError(f"trust matrix is {trust.n_agents}x{trust.n_agents} for {n} agents")
    if len(coupling) != n:
        raise ConfigurationError(f"media coupling has {len(coupling)} entries for {n} agents")
    if not np.isfinite(a_t):
        raise InputDomainError(f"media pressure must be finite, got {a_t!r}")

    opinions = state.opinions
    next_step = state.step_index + 1

    def compute(lo: int, hi: int) -> np.ndarray:
        own = opinions[lo:hi]
        with np.errstate(over="ignore", invalid="ignore"):
            diff = opinions[None, :] - own[:, None]
            if not np.all(np.isfinite(diff)):
                row = int(np.flatnonzero(~np.all(np.isfinite(diff), axis=1))[0])
                raise DivergenceError(step=next_step, agent=lo + row)
            terms = trust.weights[lo:hi] * phi_matrix(np.abs(diff), params) * diff
            drift = -params.alpha * own + coupling.c[lo:hi] * a_t + _ordered_row_sum(terms)
            return own + params.dt * drift

    new = _map_row_blocks(n, compute, executor)

    bad = np.flatnonzero(~np.isfinite(new))
    if bad.size:
        raise DivergenceError(step=next_step, agent=int(bad[0]))
    return OpinionState(new, next_step)


def _check_dimensions(initial: OpinionState, model: ModelSpec) -> None:
    if isinstance(model, ExtendedModelSpec):
        n = initial.n_agents
        if model.trust.n_agents != n or len(model.coupling) != n:
            raise ConfigurationError(
                f"model components sized for trust={model.trust.n_agents}, "
                f"coupling={len(model.coupling)} but {n} agents were given"
            )
    elif not isinstance(model, ClassicModelSpec):
        raise ConfigurationError(f"Unknown model spec: {type(model).__name__}")


def run_simulation(
    initial: OpinionState,
    model: ModelSpec,
    schedule: RunSchedule,
) -> SimulationResult:
    """Step ``initial`` until ``max_steps`` or until no opinion moves by ``tolerance``.

    The converging step itself counts toward ``steps_taken``. Snapshots are
    recorded for the initial state, every ``record_every`` steps and the final state.
    """

    _check_dimensions(initial, model)
    kind = "classic" if isinstance(model, ClassicModelSpec) else "extended"
    logging.info(
        f"[Engine] Starting {kind} run: {initial.n_agents} agents, "
        f"max_steps={schedule.max_steps}, tolerance={schedule.tolerance}, workers={schedule.workers}"
    )

    executor = ThreadPoolExecutor(max_workers=schedule.workers) if schedule.workers > 1 else None
    state = initial
    trajectory = [initial]
    converged = False
    steps = 0

    try:
        while steps < schedule.max_steps:
            try:
                if isinstance(model, ClassicModelSpec):
                    new_state = hk_classic_step(state, model.hk, executor=executor)
                else:
                    a_t = evaluate(schedule.media, state.step_index)
                    new_state = extended_step(
                        state, model.trust, model.params, model.coupling, a_t, executor=executor
                    )
            except DivergenceError as exc:
                exc.last_state = state
                logging.error(f"[Engine] Diverged at step {exc.step} (agent {exc.agent})")
                raise

            steps += 1
            change = float(np.max(np.abs(new_state.opinions - state.opinions)))
            state = new_state
            if steps % schedule.record_every == 0:
                trajectory.append(state)
            if change < schedule.tolerance:
                converged = True
                break
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    if trajectory[-1] is not state:
        trajectory.append(state)

    logging.info(f"[Engine] Finished after {steps} steps (converged={converged})")
    return SimulationResult(
        trajectory=trajectory,
        final_state=state,
        converged=converged,
        steps_taken=steps,
    )


def trajectory_frame(result: SimulationResult, dt: float = 1.0) -> pd.DataFrame:
    """Table with columns ``step, t, agent_0 ... agent_{N-1}``, one row per snapshot."""

    snapshots = result.trajectory
    n = snapshots[0].n_agents
    frame = pd.DataFrame(
        np.vstack([s.opinions for s in snapshots]),
        columns=[f"agent_{k}" for k in range(n)],
    )
    steps = np.array([s.step_index for s in snapshots], dtype=np.int64)
    frame.insert(0, "t", steps * dt)
    frame.insert(0, "step", steps)
    return frame
