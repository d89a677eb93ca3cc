"""Pluggable learners with exact Shapley attribution.

Two backends: a linear/logistic learner with closed-form linear SHAP and a
gradient-boosted-tree learner explained by path-dependent TreeSHAP. Both
satisfy local accuracy (attributions plus base value reproduce the raw
output) and are deterministic for a fixed (spec, data, seed).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from ..domain import Dataset, Task
from ..errors import DimensionMismatch, InvalidSpec
from .boosting import TreeEnsembleModel, fit_gbt
from .linear import LinearModel, fit_linear
from .oracle import exact_shapley_oracle

__all__ = [
    "LearnerKind",
    "LearnerSpec",
    "LinearModel",
    "TreeEnsembleModel",
    "fit",
    "shap_values",
    "exact_shapley_oracle",
    "dump_model",
]

MODEL_DUMP_VERSION = 1


class LearnerKind(enum.Enum):
    LINEAR = "linear"
    GRADIENT_BOOSTED_TREES = "gbt"


@dataclass(frozen=True)
class LearnerSpec:
    """Hyperparameters for a learner; loss follows the dataset task."""

    kind: LearnerKind = LearnerKind.GRADIENT_BOOSTED_TREES
    n_estimators: int = 100
    max_depth: int = 4
    learning_rate: float = 0.1
    min_samples_leaf: int = 5
    leaf_l2: float = 3.0
    split_noise: float = 1.0
    l2_penalty: float = 1e-6

    def __post_init__(self):
        if self.n_estimators < 1:
            raise InvalidSpec("n_estimators must be >= 1")
        if not 1 <= self.max_depth <= 16:
            raise InvalidSpec("max_depth must be in [1, 16]")
        if not self.learning_rate > 0:
            raise InvalidSpec("learning_rate must be > 0")
        if self.min_samples_leaf < 1:
            raise InvalidSpec("min_samples_leaf must be >= 1")
        if self.leaf_l2 < 0:
            raise InvalidSpec("leaf_l2 must be >= 0")
        if self.split_noise < 0:
            raise InvalidSpec("split_noise must be >= 0")
        if not self.l2_penalty > 0:
            raise InvalidSpec("l2_penalty must be > 0")


def _class_weights(y: np.ndarray) -> np.ndarray:
    # Inverse-frequency weights, normalized to mean 1.
    n = y.shape[0]
    n_pos = float(np.count_nonzero(y == 1.0))
    n_neg = n - n_pos
    w = np.where(y == 1.0, n / (2.0 * n_pos), n / (2.0 * n_neg))
    return w


def fit(spec: LearnerSpec, train: Dataset, seed: int = 0):
    """Fit a learner on a validated dataset.

    ``seed`` fixes all internal randomness: the boosted-tree backend draws
    its per-tree bootstrap weights from it, and identical (spec, data,
    seed) triples give bit-identical models regardless of thread count.
    The linear backend is closed-form and ignores it.
    """
    X = train.features
    y = train.target
    if train.task is Task.BINARY_CLASSIFICATION:
        weights = _class_weights(y)
    else:
        weights = np.ones(train.n_samples)
    if spec.kind is LearnerKind.LINEAR:
        return fit_linear(X, y, train.task, spec, weights)
    return fit_gbt(X, y, train.task, spec, weights, seed=seed)


def shap_values(model, eval_rows) -> np.ndarray:
    """Per-row, per-feature Shapley attributions in raw-output space."""
    X = np.asarray(eval_rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"eval rows must be 2-D with {model.n_features} columns, "
            f"got shape {X.shape}"
        )
    return model.shap(np.ascontiguousarray(X))


def dump_model(model) -> dict:
    """Debug dump of a fitted model as a JSON-ready dict (version 1).

    Not used by selection; exists so a fitted ensemble can be inspected or
    diffed offline.
    """
    if isinstance(model, LinearModel):
        return {
            "format_version": MODEL_DUMP_VERSION,
            "kind": model.kind,
            "task": model.task.value,
            "intercept": model.intercept,
            "weights": model.weights.tolist(),
            "train_means": model.train_means.tolist(),
        }
    if isinstance(model, TreeEnsembleModel):
        return {
            "format_version": MODEL_DUMP_VERSION,
            "kind": model.kind,
            "task": model.task.value,
            "base_score": model.base_score,
            "learning_rate": model.learning_rate,
            "n_trees": model.n_trees,
            "offsets": model.offsets.tolist(),
            "feature": model.feature.tolist(),
            "threshold": model.threshold.tolist(),
            "left": model.left.tolist(),
            "right": model.right.tolist(),
            "value": model.value.tolist(),
            "cover": model.cover.tolist(),
        }
    raise DimensionMismatch(f"unsupported model type {type(model).__name__}")


def dump_model_json(model) -> str:
    return json.dumps(dump_model(model), indent=2)
