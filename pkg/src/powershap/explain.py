"""Impact-matrix construction: per iteration, inject a fresh uniform
random probe column, split train/validation, fit, and reduce the
validation Shapley values to one mean |SHAP| per feature.

Iteration i is a pure function of (plan, data, i): its RNG is seeded with
base_seed + i, so appending iterations continues the seed sequence and
leaves earlier rows bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Dataset, ImpactMatrix, Task
from .errors import InvalidSpec, SplitTooSmall
from .models import LearnerSpec, fit, shap_values

PROBE_NAME = "__random_probe__"


@dataclass(frozen=True)
class ExplainPlan:
    iterations: int
    learner: LearnerSpec
    base_seed: int = 0
    val_fraction: float = 0.2

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidSpec("iterations must be >= 1")
        if not 0.0 < self.val_fraction < 1.0:
            raise InvalidSpec("val_fraction must be in (0, 1)")


def _split_indices(rng, target, task, val_fraction):
    """Seeded shuffle split, stratified by class for classification.

    Guarantees >= 1 validation row, >= 2 training rows, and (for
    classification) both classes present in training.
    """
    n = target.shape[0]
    if task is Task.BINARY_CLASSIFICATION:
        val_parts = []
        for cls in (0.0, 1.0):
            idx = np.flatnonzero(target == cls)
            take = int(round(val_fraction * idx.size))
            take = min(take, idx.size - 1)  # keep the class alive in train
            perm = rng.permutation(idx)
            if take > 0:
                val_parts.append(perm[:take])
        if not val_parts:
            raise SplitTooSmall(
                f"val_fraction {val_fraction} yields no validation rows for n={n}"
            )
        val = np.concatenate(val_parts)
    else:
        take = int(round(val_fraction * n))
        take = max(1, min(take, n - 2))
        perm = rng.permutation(n)
        val = perm[:take]
    mask = np.ones(n, dtype=bool)
    mask[val] = False
    train = np.flatnonzero(mask)
    if train.size < 2:
        raise SplitTooSmall(
            f"val_fraction {val_fraction} leaves only {train.size} training rows"
        )
    return train, np.sort(val)


def _probe_name(taken: tuple[str, ...]) -> str:
    name = PROBE_NAME
    while name in taken:
        name += "_"
    return name


def _iteration_row(plan: ExplainPlan, data: Dataset, iteration: int) -> np.ndarray:
    rs = plan.base_seed + iteration
    rng = np.random.default_rng(rs)
    probe = rng.uniform(-1.0, 1.0, data.n_samples)
    train_idx, val_idx = _split_indices(rng, data.target, data.task, plan.val_fraction)

    X_aug = np.column_stack([data.features, probe])
    train = Dataset(
        features=X_aug[train_idx],
        target=data.target[train_idx],
        feature_names=data.feature_names + (_probe_name(data.feature_names),),
        task=data.task,
    )
    model = fit(plan.learner, train, seed=rs)
    phi = shap_values(model, X_aug[val_idx])
    return np.abs(phi).mean(axis=0)


def explain(plan: ExplainPlan, data: Dataset) -> ImpactMatrix:
    """Run plan.iterations independent iterations; row i uses seed
    base_seed + i (1-based)."""
    rows = [_iteration_row(plan, data, i) for i in range(1, plan.iterations + 1)]
    return ImpactMatrix(values=np.vstack(rows), feature_names=data.feature_names)


def explain_append(
    existing: ImpactMatrix, extra_iterations: int, plan: ExplainPlan, data: Dataset
) -> ImpactMatrix:
    """Extend an impact matrix, continuing the iteration/seed counter so no
    seed repeats within a run; the existing rows are preserved bit-exactly."""
    if extra_iterations < 0:
        raise InvalidSpec("extra_iterations must be >= 0")
    if existing.n_features != data.n_features:
        raise InvalidSpec("impact matrix does not match the dataset's feature count")
    if extra_iterations == 0:
        return existing
    start = existing.iterations + 1
    rows = [
        _iteration_row(plan, data, i)
        for i in range(start, start + extra_iterations)
    ]
    return ImpactMatrix(
        values=np.vstack([existing.values, np.vstack(rows)]),
        feature_names=data.feature_names,
    )
