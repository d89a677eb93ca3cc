"""Exception hierarchy.

Every public operation either returns a value satisfying its contract or
raises one of these; no partially-constructed state escapes.
"""

from __future__ import annotations


class PowershapError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PowershapError, ValueError):
    """Input violates a construction contract."""


class EmptyDataset(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    def __init__(self, where: str, row: int | None = None, col: int | None = None):
        self.row = row
        self.col = col
        loc = ""
        if row is not None:
            loc += f" at row {row}"
        if col is not None:
            loc += f", column {col}" if row is not None else f" at column {col}"
        super().__init__(f"non-finite value in {where}{loc}")


class DuplicateFeatureName(ValidationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"duplicate feature name: {name!r}")


class SingleClassTarget(ValidationError):
    pass


class InvalidTargetValue(ValidationError):
    """Classification target contains values other than 0 and 1."""


class ShapeMismatch(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class StatsError(PowershapError):
    """Base class for errors from the statistical kernel."""


class EmptyVector(StatsError):
    pass


class TooFewSamples(StatsError):
    pass


class ZeroPooledStd(StatsError):
    """Both samples are constant; Cohen's d is unbounded."""


class InvalidDf(StatsError):
    pass


class InvalidProbability(StatsError):
    pass


class SeriesNonConvergence(StatsError):
    """Internal series iteration cap exceeded; never silently truncated."""


class NoRootBracket(StatsError):
    """Power is non-monotone over the solver bracket (internal error)."""


class TooFewIterations(StatsError):
    pass


class ModelError(PowershapError):
    pass


class DimensionMismatch(ModelError):
    pass


class TooManyFeatures(ModelError):
    pass


class DegenerateTraining(ModelError):
    pass


class SplitTooSmall(PowershapError):
    """Train/validation split cannot satisfy its minimum-size contract."""
