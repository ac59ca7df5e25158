from __future__ import annotations

"""Exception hierarchy shared by the simulator, the analysis layer and the CLI."""

from typing import Any, Optional

__all__ = [
    "OpinionSimError",
    "InputDomainError",
    "ConfigurationError",
    "FormatError",
    "DivergenceError",
]


class OpinionSimError(Exception):
    """Base class for every error raised by this package."""


class InputDomainError(OpinionSimError, ValueError):
    """A numeric input lies outside the domain of the operation."""


class ConfigurationError(OpinionSimError, ValueError):
    """Inconsistent or invalid experiment components (dimensions, binning, specs)."""


class FormatError(OpinionSimError, ValueError):
    """An input file does not follow its documented schema."""


class DivergenceError(OpinionSimError, ArithmeticError):
    """An opinion became non-finite during a run.

    ``last_state`` is filled in by the run loop with the last all-finite state.
    """

    def __init__(self, step: int, agent: int, last_state: Optional[Any] = None):
        self.step = step
        self.agent = agent
        self.last_state = last_state
        super().__init__(f"Opinion of agent {agent} became non-finite at step {step}")
