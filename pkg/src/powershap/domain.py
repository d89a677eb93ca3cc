"""Core data types shared by all stages.

All types are immutable after construction (backing arrays are marked
read-only) and safe to share across threads. Construction is total: inputs
either yield an instance satisfying every invariant or raise a
:class:`~powershap.errors.ValidationError` subclass.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateFeatureName,
    EmptyDataset,
    InvalidSpec,
    InvalidTargetValue,
    NonFiniteValue,
    ShapeMismatch,
    SingleClassTarget,
)


class Task(enum.Enum):
    BINARY_CLASSIFICATION = "classification"
    REGRESSION = "regression"


class Mode(enum.Enum):
    FIXED = "fixed"
    AUTOMATIC = "automatic"
    CONVERGENCE = "convergence"


class PValueStyle(enum.Enum):
    """Percentile formula used for both selection and reporting.

    ANTICONSERVATIVE is the plain empirical fraction (multiples of 1/I);
    NORTH_CORRECTED is the (1 + hits) / (I + 1) small-sample correction.
    """

    ANTICONSERVATIVE = "anticonservative"
    NORTH_CORRECTED = "north-corrected"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """A validated dense feature matrix with its target.

    Use :func:`validate_dataset` to construct; direct construction skips
    validation and is reserved for internal callers that already hold
    validated arrays.
    """

    features: np.ndarray
    target: np.ndarray
    feature_names: tuple[str, ...]
    task: Task

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def drop_features(self, names: set[str] | frozenset[str]) -> "Dataset":
        """Dataset with the given feature columns removed, order preserved."""
        keep = [i for i, n in enumerate(self.feature_names) if n not in names]
        return Dataset(
            features=_freeze(np.ascontiguousarray(self.features[:, keep])),
            target=self.target,
            feature_names=tuple(self.feature_names[i] for i in keep),
            task=self.task,
        )


def validate_dataset(
    features,
    target,
    feature_names,
    task: Task,
) -> Dataset:
    """Validate raw arrays and return an immutable :class:`Dataset`.

    Raises a ValidationError subclass naming the offending row/column when
    the input breaks an invariant.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeMismatch(f"features must be 2-D, got ndim={X.ndim}")
    if y.ndim != 1:
        raise ShapeMismatch(f"target must be 1-D, got ndim={y.ndim}")
    n, m = X.shape
    if n == 0 or m == 0:
        raise EmptyDataset(f"need at least 2 rows and 1 column, got {n}x{m}")
    if n < 2:
        raise EmptyDataset(f"need at least 2 rows, got {n}")
    if y.shape[0] != n:
        raise ShapeMismatch(f"target length {y.shape[0]} != row count {n}")

    names = tuple(str(s) for s in feature_names)
    if len(names) != m:
        raise ShapeMismatch(f"{len(names)} feature names for {m} columns")
    seen: set[str] = set()
    for name in names:
        if name in seen:
            raise DuplicateFeatureName(name)
        seen.add(name)

    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        r, c = int(bad[0, 0]), int(bad[0, 1])
        raise NonFiniteValue("features", row=r, col=c)
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        raise NonFiniteValue("target", row=int(bad[0]))

    if task is Task.BINARY_CLASSIFICATION:
        values = np.unique(y)
        if not np.all(np.isin(values, (0.0, 1.0))):
            off = values[~np.isin(values, (0.0, 1.0))][0]
            raise InvalidTargetValue(
                f"classification target must contain only 0 and 1, found {off}"
            )
        if values.size < 2:
            raise SingleClassTarget(
                f"classification target contains a single class ({values[0]:g})"
            )

    return Dataset(
        features=_freeze(np.ascontiguousarray(X)),
        target=_freeze(np.ascontiguousarray(y)),
        feature_names=names,
        task=task,
    )


@dataclass(frozen=True, eq=False)
class ImpactMatrix:
    """Per-iteration mean |SHAP| values, one row per iteration.

    The last column always belongs to the injected random probe, so the
    column count is the dataset feature count plus one.
    """

    values: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] < 1:
            raise ShapeMismatch("impact matrix must be 2-D with >= 1 row")
        if v.shape[1] != len(self.feature_names) + 1:
            raise ShapeMismatch(
                f"{v.shape[1]} columns for {len(self.feature_names)} features + probe"
            )
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ShapeMismatch("impact entries must be finite and >= 0")
        _freeze(v)

    @property
    def iterations(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1] - 1

    @property
    def probe_column(self) -> np.ndarray:
        return self.values[:, -1]

    def feature_column(self, j: int) -> np.ndarray:
        return self.values[:, j]


@dataclass(frozen=True, eq=False)
class FeatureReport:
    """Per-feature statistics from one analysis pass (probe excluded).

    ``required_iterations`` uses ``inf`` as the sentinel for "unattainable
    at any iteration count"; ``effect_sizes`` is ``+/-inf`` when the pooled
    standard deviation degenerates to zero with unequal means.
    """

    feature_names: tuple[str, ...]
    p_values: np.ndarray
    effect_sizes: np.ndarray
    required_iterations: np.ndarray
    mean_impacts: np.ndarray

    def __post_init__(self):
        m = len(self.feature_names)
        for label in ("p_values", "effect_sizes", "required_iterations", "mean_impacts"):
            arr = getattr(self, label)
            if arr.shape != (m,):
                raise ShapeMismatch(f"{label} must have length {m}")
            _freeze(arr)
        if np.any((self.p_values < 0) | (self.p_values > 1)):
            raise ShapeMismatch("p-values must lie in [0, 1]")
        if np.any(self.mean_impacts < 0):
            raise ShapeMismatch("mean impacts must be >= 0")


@dataclass(frozen=True)
class PowershapConfig:
    """Knobs for a selection run; defaults follow the automatic mode."""

    alpha: float = 0.01
    required_power: float = 0.99
    initial_iterations: int = 10
    max_iterations: int = 100
    fixed_iterations: int = 10
    val_fraction: float = 0.2
    base_seed: int = 0
    mode: Mode = Mode.AUTOMATIC
    p_value_style: PValueStyle = PValueStyle.ANTICONSERVATIVE

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidSpec(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 < self.required_power < 1.0:
            raise InvalidSpec(f"required_power must be in (0, 1), got {self.required_power}")
        if not 0.0 < self.val_fraction < 1.0:
            raise InvalidSpec(f"val_fraction must be in (0, 1), got {self.val_fraction}")
        if self.initial_iterations < 2:
            raise InvalidSpec("initial_iterations must be >= 2")
        if self.fixed_iterations < 2:
            raise InvalidSpec("fixed_iterations must be >= 2")
        if self.initial_iterations > self.max_iterations:
            raise InvalidSpec(
                f"initial_iterations ({self.initial_iterations}) exceeds "
                f"max_iterations ({self.max_iterations})"
            )
        if not math.isfinite(self.alpha) or not math.isfinite(self.required_power):
            raise InvalidSpec("alpha and required_power must be finite")


@dataclass(frozen=True, eq=False)
class SelectionRound:
    """Audit record of one selection round (one per run, several under
    convergence mode)."""

    selected: tuple[str, ...]
    report: FeatureReport
    iterations: int
    truncated: bool


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Chosen feature set plus the full audit trail of the run."""

    selected: tuple[str, ...]
    report: FeatureReport
    iterations_performed: int
    truncated: bool
    rounds: tuple[SelectionRound, ...] = field(default_factory=tuple)

    def selected_indices(self, feature_names: tuple[str, ...] | None = None) -> list[int]:
        names = feature_names if feature_names is not None else self.report.feature_names
        index = {n: i for i, n in enumerate(names)}
        return [index[n] for n in self.selected]
