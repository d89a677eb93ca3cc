import numpy as np
import pytest

from powershap.domain import (
    ImpactMatrix,
    PowershapConfig,
    Task,
    validate_dataset,
)
from powershap.errors import (
    DuplicateFeatureName,
    EmptyDataset,
    InvalidSpec,
    InvalidTargetValue,
    NonFiniteValue,
    ShapeMismatch,
    SingleClassTarget,
)


def test_minimal_valid_dataset():
    ds = validate_dataset(
        [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]],
        [0, 1, 0, 1],
        ["a", "b"],
        Task.BINARY_CLASSIFICATION,
    )
    assert ds.n_samples == 4
    assert ds.n_features == 2
    assert ds.feature_names == ("a", "b")


def test_nan_reported_with_position():
    X = np.ones((4, 3))
    X[2, 1] = np.nan
    with pytest.raises(NonFiniteValue) as exc:
        validate_dataset(X, [0, 1, 0, 1], ["a", "b", "c"], Task.BINARY_CLASSIFICATION)
    assert exc.value.row == 2
    assert exc.value.col == 1
    assert "row 2" in str(exc.value)


def test_inf_in_target():
    y = np.array([0.0, np.inf, 1.0])
    with pytest.raises(NonFiniteValue) as exc:
        validate_dataset(np.ones((3, 1)), y, ["a"], Task.REGRESSION)
    assert exc.value.row == 1


def test_single_class_rejected():
    with pytest.raises(SingleClassTarget):
        validate_dataset(np.ones((3, 1)), [0, 0, 0], ["a"], Task.BINARY_CLASSIFICATION)


def test_multiclass_rejected():
    with pytest.raises(InvalidTargetValue):
        validate_dataset(np.eye(3), [0, 1, 2], ["a", "b", "c"], Task.BINARY_CLASSIFICATION)


def test_duplicate_names_rejected():
    with pytest.raises(DuplicateFeatureName):
        validate_dataset(np.ones((2, 2)), [0.0, 1.0], ["x", "x"], Task.REGRESSION)


def test_empty_and_shape_errors():
    with pytest.raises(EmptyDataset):
        validate_dataset(np.empty((0, 2)), [], ["a", "b"], Task.REGRESSION)
    with pytest.raises(EmptyDataset):
        validate_dataset([[1.0]], [1.0], ["a"], Task.REGRESSION)
    with pytest.raises(ShapeMismatch):
        validate_dataset(np.ones((3, 2)), [1.0, 2.0], ["a", "b"], Task.REGRESSION)
    with pytest.raises(ShapeMismatch):
        validate_dataset(np.ones((3, 2)), [1.0, 2.0, 3.0], ["a"], Task.REGRESSION)


def test_dataset_arrays_immutable():
    ds = validate_dataset(np.ones((3, 2)), [0.0, 1.0, 2.0], ["a", "b"], Task.REGRESSION)
    with pytest.raises(ValueError):
        ds.features[0, 0] = 9.0
    with pytest.raises(ValueError):
        ds.target[0] = 9.0


def test_drop_features_preserves_order():
    ds = validate_dataset(
        np.arange(12.0).reshape(3, 4), [0.0, 1.0, 2.0], ["a", "b", "c", "d"], Task.REGRESSION
    )
    sub = ds.drop_features({"b", "d"})
    assert sub.feature_names == ("a", "c")
    assert np.array_equal(sub.features, ds.features[:, [0, 2]])


def test_impact_matrix_contracts():
    values = np.array([[0.1, 0.2, 0.05], [0.3, 0.1, 0.0]])
    im = ImpactMatrix(values=values, feature_names=("a", "b"))
    assert im.iterations == 2
    assert im.n_features == 2
    assert np.array_equal(im.probe_column, values[:, 2])
    with pytest.raises(ShapeMismatch):
        ImpactMatrix(values=values, feature_names=("a", "b", "c"))
    with pytest.raises(ShapeMismatch):
        ImpactMatrix(values=-values, feature_names=("a", "b"))


def test_config_invariants():
    cfg = PowershapConfig()
    assert cfg.alpha == 0.01
    assert cfg.required_power == 0.99
    assert cfg.initial_iterations == 10
    assert cfg.max_iterations == 100
    assert cfg.val_fraction == 0.2
    with pytest.raises(InvalidSpec):
        PowershapConfig(alpha=0.0)
    with pytest.raises(InvalidSpec):
        PowershapConfig(initial_iterations=50, max_iterations=20)
    with pytest.raises(InvalidSpec):
        PowershapConfig(val_fraction=1.0)
