"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PlannerError(Exception):
    """Base class for every error raised by robust_planner."""


class ModelError(PlannerError, ValueError):
    """A domain object violates one of its invariants."""


class ScenarioError(ModelError):
    """A scenario is well-formed text but semantically invalid (bounds, ranges)."""


class ValueRangeError(ModelError):
    """A state value or normalized value fell outside its declared range."""


class DslError(PlannerError, ValueError):
    """Syntax or reference error in a domain/scenario document."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class PlanFormatError(PlannerError, ValueError):
    """A serialized plan is malformed or violates plan invariants."""


class SimulationError(PlannerError, ValueError):
    """Invalid execution configuration for a plan."""
