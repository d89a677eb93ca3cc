"""Seeded synthetic datasets with known informative features.

Classification: the informative subspace holds one Gaussian cluster per
class, centered on antipodal hypercube vertices scaled by class_sep, so
every informative dimension separates the classes. Regression: the target
is a seeded linear combination of the informative columns plus Gaussian
noise. Noise features are i.i.d. standard normal in both variants, and
columns are randomly permuted with the ground-truth mask tracking the
permutation. No redundant or duplicate features are generated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Dataset, Task, validate_dataset
from .errors import InvalidSpec


@dataclass(frozen=True)
class SimSpec:
    n_samples: int = 5000
    n_features: int = 20
    n_informative: int = 2
    class_sep: float = 1.0
    noise_scale: float = 0.1
    task: Task = Task.BINARY_CLASSIFICATION
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 4:
            raise InvalidSpec("n_samples must be >= 4")
        if not 1 <= self.n_informative <= self.n_features:
            raise InvalidSpec(
                f"need 1 <= n_informative <= n_features, got "
                f"{self.n_informative} of {self.n_features}"
            )
        if not self.class_sep > 0:
            raise InvalidSpec("class_sep must be > 0")
        if self.noise_scale < 0:
            raise InvalidSpec("noise_scale must be >= 0")


def _feature_names(m: int) -> list[str]:
    return [f"f{i:03d}" for i in range(m)]


def make_classification(spec: SimSpec) -> tuple[Dataset, np.ndarray]:
    """Binary classification sample plus the informative-column mask."""
    if spec.task is not Task.BINARY_CLASSIFICATION:
        raise InvalidSpec("make_classification requires a classification SimSpec")
    rng = np.random.default_rng(spec.seed)
    n, m, k = spec.n_samples, spec.n_features, spec.n_informative

    # Antipodal hypercube vertices: every informative dimension separates
    # the classes by 2 * class_sep.
    vertex = rng.choice(np.array([-1.0, 1.0]), size=k)
    n0 = n // 2
    n1 = n - n0
    y = np.concatenate([np.zeros(n0), np.ones(n1)])

    informative = rng.normal(size=(n, k))
    informative[:n0] += vertex * spec.class_sep
    informative[n0:] -= vertex * spec.class_sep
    noise = rng.normal(size=(n, m - k))

    X = np.concatenate([informative, noise], axis=1)
    mask = np.zeros(m, dtype=bool)
    mask[:k] = True

    col_perm = rng.permutation(m)
    X = X[:, col_perm]
    mask = mask[col_perm]
    row_perm = rng.permutation(n)
    X = X[row_perm]
    y = y[row_perm]

    dataset = validate_dataset(X, y, _feature_names(m), Task.BINARY_CLASSIFICATION)
    return dataset, mask


def make_regression(spec: SimSpec) -> tuple[Dataset, np.ndarray]:
    """Regression sample plus the informative-column mask."""
    if spec.task is not Task.REGRESSION:
        raise InvalidSpec("make_regression requires a regression SimSpec")
    rng = np.random.default_rng(spec.seed)
    n, m, k = spec.n_samples, spec.n_features, spec.n_informative

    X = rng.normal(size=(n, m))
    positions = rng.permutation(m)[:k]
    signs = rng.choice(np.array([-1.0, 1.0]), size=k)
    magnitudes = rng.uniform(0.5, 2.0, size=k)
    weights = signs * magnitudes

    signal = X[:, positions] @ weights
    sigma_signal = float(signal.std())
    y = signal + rng.normal(scale=spec.noise_scale * sigma_signal, size=n)

    mask = np.zeros(m, dtype=bool)
    mask[positions] = True
    dataset = validate_dataset(X, y, _feature_names(m), Task.REGRESSION)
    return dataset, mask


def make_dataset(spec: SimSpec) -> tuple[Dataset, np.ndarray]:
    if spec.task is Task.BINARY_CLASSIFICATION:
        return make_classification(spec)
    return make_regression(spec)


def write_csv(dataset: Dataset, path, target_column: str = "target") -> None:
    """Emit a dataset in the CLI's CSV format (header row, ',' delimiter,
    '.' decimals, full float round-trip)."""
    with open(path, "w") as fh:
        fh.write(",".join((*dataset.feature_names, target_column)) + "\n")
        for row, y in zip(dataset.features, dataset.target):
            fh.write(",".join(repr(float(v)) for v in row) + f",{float(y)!r}\n")
