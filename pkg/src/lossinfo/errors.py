"""Semantic exception hierarchy.

Public functions raise these instead of bare ValueError/RuntimeError so
callers (and the CLI exit-code mapping) can tell validation problems,
solver failures, and genuinely undefined arithmetic apart.
"""


class LossInfoError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LossInfoError, ValueError):
    """Inputs violate a construction contract (domain/shape/normalization)."""


class PartitionMismatchError(LossInfoError, ValueError):
    """Two partitions do not live on the same atom set."""


class ZeroMassBlockError(LossInfoError):
    """A partition block has zero probability where positive mass is required."""


class UndefinedArithmeticError(LossInfoError, ArithmeticError):
    """An extended-real operation with no defined value (inf minus inf)."""


class InfiniteQuantityError(LossInfoError):
    """A finite quantity was requested but one of its terms is infinite."""


class SolverError(LossInfoError, RuntimeError):
    """Numeric Bayes-act search failed (non-finite loss, no convergence)."""


class UnboundedSearchError(SolverError):
    """Numeric minimization requested over an unbounded action space."""


class GridError(LossInfoError, ValueError):
    """A grid density is malformed, non-normalized, or too coarse."""


class ScenarioError(LossInfoError, ValueError):
    """A scenario file violates the schema. Carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
