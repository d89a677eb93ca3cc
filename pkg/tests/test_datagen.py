import numpy as np
import pytest

from powershap.datagen import SimSpec, make_classification, make_regression
from powershap.domain import Task
from powershap.errors import InvalidSpec
from powershap.models import LearnerKind, LearnerSpec, fit


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        SimSpec(n_features=5, n_informative=6)
    with pytest.raises(InvalidSpec):
        SimSpec(n_informative=0)
    with pytest.raises(InvalidSpec):
        SimSpec(class_sep=0.0)


def test_classification_mask_and_shapes():
    spec = SimSpec(n_samples=200, n_features=12, n_informative=4, seed=1)
    data, mask = make_classification(spec)
    assert data.features.shape == (200, 12)
    assert mask.shape == (12,)
    assert mask.sum() == 4
    assert data.task is Task.BINARY_CLASSIFICATION
    assert np.all(np.isfinite(data.features))
    assert set(np.unique(data.target)) == {0.0, 1.0}


def test_all_informative_mask():
    data, mask = make_classification(
        SimSpec(n_samples=50, n_features=3, n_informative=3, seed=0)
    )
    assert mask.all()


def test_determinism():
    spec = SimSpec(n_samples=100, n_features=8, n_informative=2, seed=42)
    a, mask_a = make_classification(spec)
    b, mask_b = make_classification(spec)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.target, b.target)
    assert np.array_equal(mask_a, mask_b)


def test_informative_columns_carry_class_signal():
    data, mask = make_classification(
        SimSpec(n_samples=2000, n_features=10, n_informative=3, class_sep=1.0, seed=3)
    )
    X, y = data.features, data.target
    gaps = np.abs(X[y == 1].mean(axis=0) - X[y == 0].mean(axis=0))
    # every informative column separates the class means by ~2*class_sep
    assert gaps[mask].min() > 1.5
    assert gaps[~mask].max() < 0.5


def test_large_separation_is_shallow_tree_separable():
    data, _ = make_classification(
        SimSpec(n_samples=1000, n_features=6, n_informative=2, class_sep=8.0, seed=5)
    )
    model = fit(
        LearnerSpec(
            kind=LearnerKind.GRADIENT_BOOSTED_TREES,
            n_estimators=20,
            max_depth=2,
        ),
        data,
    )
    acc = float(((model.predict_raw(data.features) > 0) == (data.target > 0.5)).mean())
    assert acc >= 0.99


def test_regression_mask_and_noise_free_correlation():
    spec = SimSpec(
        n_samples=500,
        n_features=1,
        n_informative=1,
        noise_scale=0.0,
        task=Task.REGRESSION,
        seed=7,
    )
    data, mask = make_regression(spec)
    assert mask.sum() == 1
    corr = np.corrcoef(data.features[:, 0], data.target)[0, 1]
    assert abs(corr) == pytest.approx(1.0, abs=1e-12)


def test_regression_linear_fit_recovers_informative_weights():
    spec = SimSpec(
        n_samples=3000, n_features=12, n_informative=3, task=Task.REGRESSION, seed=9
    )
    data, mask = make_regression(spec)
    model = fit(LearnerSpec(kind=LearnerKind.LINEAR), data)
    w = np.abs(model.weights)
    assert w[mask].min() > 10 * w[~mask].max()


def test_write_csv_roundtrips_through_cli_loader(tmp_path):
    from powershap.cli import load_csv
    from powershap.datagen import write_csv

    data, _ = make_classification(
        SimSpec(n_samples=40, n_features=3, n_informative=1, seed=4)
    )
    path = tmp_path / "gen.csv"
    write_csv(data, path)
    features, target, names = load_csv(str(path), "target")
    assert names == list(data.feature_names)
    assert np.array_equal(features, data.features)
    assert np.array_equal(target, data.target)
