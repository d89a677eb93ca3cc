import numpy as np
import pytest

from powershap.domain import Task, validate_dataset
from powershap.errors import SplitTooSmall
from powershap.explain import ExplainPlan, _split_indices, explain, explain_append
from powershap.models import LearnerKind, LearnerSpec

SMALL_GBT = LearnerSpec(kind=LearnerKind.GRADIENT_BOOSTED_TREES, n_estimators=10, max_depth=2)


def _toy_classification(n=120, m=4, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, m))
    y = (X[:, 0] > 0).astype(float)
    return validate_dataset(X, y, [f"f{i}" for i in range(m)], Task.BINARY_CLASSIFICATION)


def test_matrix_shape_and_nonnegativity():
    data = _toy_classification()
    matrix = explain(ExplainPlan(iterations=3, learner=SMALL_GBT), data)
    assert matrix.values.shape == (3, 5)
    assert np.all(matrix.values >= 0)


def test_explain_deterministic():
    data = _toy_classification()
    plan = ExplainPlan(iterations=4, learner=SMALL_GBT, base_seed=11)
    a = explain(plan, data)
    b = explain(plan, data)
    assert np.array_equal(a.values, b.values)


def test_append_prefix_stability_and_equivalence():
    data = _toy_classification()
    plan = ExplainPlan(iterations=10, learner=SMALL_GBT, base_seed=5)
    ten = explain(plan, data)

    appended = explain_append(ten, 0, plan, data)
    assert appended is ten

    fifteen_direct = explain(
        ExplainPlan(iterations=15, learner=SMALL_GBT, base_seed=5), data
    )
    fifteen_grown = explain_append(ten, 5, plan, data)
    assert np.array_equal(fifteen_grown.values[:10], ten.values)
    assert np.array_equal(fifteen_grown.values, fifteen_direct.values)


def test_probe_draws_differ_across_iterations_and_stay_bounded():
    # iteration i is seeded with base_seed + i, so the injected columns are
    # re-drawn every iteration and never repeat
    draws = [np.random.default_rng(7 + i).uniform(-1.0, 1.0, 50) for i in range(1, 7)]
    for i, a in enumerate(draws):
        assert a.min() >= -1.0 and a.max() <= 1.0
        for b in draws[i + 1 :]:
            assert not np.array_equal(a, b)


def test_probe_impacts_vary_on_noisy_task():
    # on a noisy target the trees overfit the probe a little, so its
    # per-iteration impact reflects the fresh draw
    rng = np.random.default_rng(21)
    X = rng.normal(size=(80, 3))
    y = X[:, 0] + rng.normal(size=80)
    data = validate_dataset(X, y, ["a", "b", "c"], Task.REGRESSION)
    learner = LearnerSpec(
        kind=LearnerKind.GRADIENT_BOOSTED_TREES,
        n_estimators=30,
        max_depth=3,
        min_samples_leaf=2,
    )
    matrix = explain(ExplainPlan(iterations=6, learner=learner), data)
    assert np.unique(matrix.probe_column).size > 1


def test_split_stratified_keeps_classes_in_train():
    rng = np.random.default_rng(0)
    # 90/10 imbalance, small n: every iteration must keep both classes in train
    y = np.array([0.0] * 18 + [1.0] * 2)
    for seed in range(30):
        train, val = _split_indices(
            np.random.default_rng(seed), y, Task.BINARY_CLASSIFICATION, 0.2
        )
        assert set(np.unique(y[train])) == {0.0, 1.0}
        assert np.intersect1d(train, val).size == 0
        assert train.size + val.size == 20
        assert val.size >= 1
    del rng


def test_split_regression_sizes():
    y = np.arange(10.0)
    train, val = _split_indices(np.random.default_rng(1), y, Task.REGRESSION, 0.2)
    assert val.size == 2
    assert train.size == 8


def test_split_too_small():
    y = np.array([0.0, 1.0])
    with pytest.raises(SplitTooSmall):
        _split_indices(np.random.default_rng(0), y, Task.BINARY_CLASSIFICATION, 0.2)


def test_explain_rows_are_per_iteration_fits():
    # iterations differ in split and probe, so rows are not all identical
    data = _toy_classification(seed=9)
    matrix = explain(ExplainPlan(iterations=5, learner=SMALL_GBT), data)
    assert np.unique(matrix.values[:, 0]).size > 1
