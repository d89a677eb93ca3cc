import math

import numpy as np
import pytest

from powershap.domain import (
    ImpactMatrix,
    Mode,
    PowershapConfig,
    PValueStyle,
    Task,
    validate_dataset,
)
from powershap.errors import TooFewIterations
from powershap.explain import PROBE_NAME
from powershap.models import LearnerKind, LearnerSpec
from powershap.selection import (
    analyze,
    select_automatic,
    select_convergence,
    select_fixed,
)
from powershap.stats import UNATTAINABLE

GBT = LearnerSpec(kind=LearnerKind.GRADIENT_BOOSTED_TREES, n_estimators=20, max_depth=3)


def _matrix(feature_cols, probe_col):
    values = np.column_stack(feature_cols + [probe_col])
    names = tuple(f"f{i}" for i in range(len(feature_cols)))
    return ImpactMatrix(values=values, feature_names=names)


def test_analyze_feature_identical_to_probe():
    # 10 symmetric values: exactly 5 lie strictly below their own mean
    probe = np.array([0.1, 0.2, 0.3, 0.4, 0.45, 0.55, 0.6, 0.7, 0.8, 0.9])
    out = analyze(_matrix([probe.copy()], probe), alpha=0.01, target_power=0.99)
    assert out.probe_mean == pytest.approx(0.5)
    assert out.report.p_values[0] == pytest.approx(0.5)
    assert out.report.effect_sizes[0] == pytest.approx(0.0)
    assert out.report.required_iterations[0] == UNATTAINABLE


def test_analyze_extreme_columns():
    probe = np.array([0.5, 0.5, 0.5, 0.5])
    above = np.array([0.9, 0.8, 0.7, 0.6])
    below = np.array([0.1, 0.2, 0.3, 0.4])
    out = analyze(_matrix([above, below], probe), alpha=0.01, target_power=0.99)
    assert out.report.p_values[0] == 0.0
    assert out.report.p_values[1] == 1.0


def test_analyze_zero_pooled_std_mappings():
    probe = np.array([0.5, 0.5, 0.5])
    winner = np.array([0.9, 0.9, 0.9])
    loser = np.array([0.1, 0.1, 0.1])
    tied = np.array([0.5, 0.5, 0.5])
    out = analyze(_matrix([winner, loser, tied], probe), alpha=0.01, target_power=0.99)
    assert out.report.required_iterations[0] == 2.0
    assert out.report.effect_sizes[0] == math.inf
    assert out.report.required_iterations[1] == UNATTAINABLE
    assert out.report.effect_sizes[1] == -math.inf
    assert out.report.required_iterations[2] == UNATTAINABLE


def test_analyze_needs_two_rows():
    one_row = ImpactMatrix(values=np.array([[0.1, 0.2]]), feature_names=("a",))
    with pytest.raises(TooFewIterations):
        analyze(one_row, alpha=0.01, target_power=0.99)


def test_analyze_north_corrected_dominates():
    rng = np.random.default_rng(0)
    cols = [rng.uniform(0, 1, 10) for _ in range(3)]
    probe = rng.uniform(0, 1, 10)
    plain = analyze(_matrix(cols, probe), 0.01, 0.99, PValueStyle.ANTICONSERVATIVE)
    corrected = analyze(_matrix(cols, probe), 0.01, 0.99, PValueStyle.NORTH_CORRECTED)
    assert np.all(corrected.report.p_values >= plain.report.p_values)


def _single_signal_dataset(n=1000, m=10, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, m))
    y = X[:, 0].copy()
    return validate_dataset(X, y, [f"f{i}" for i in range(m)], Task.REGRESSION)


def test_select_fixed_finds_exact_signal():
    data = _single_signal_dataset()
    result = select_fixed(data, GBT, iterations=10, alpha=0.01, seed=0)
    assert "f0" in result.selected
    assert result.iterations_performed == 10
    assert PROBE_NAME not in result.selected


def test_select_fixed_alpha_extremes():
    data = _single_signal_dataset(n=300, m=4, seed=1)
    everything = select_fixed(data, GBT, iterations=5, alpha=1.0, seed=0)
    rep = everything.report
    assert set(everything.selected) == {
        n for n, p in zip(rep.feature_names, rep.p_values) if p < 1.0
    }
    nothing = select_fixed(data, GBT, iterations=5, alpha=0.0, seed=0)
    assert nothing.selected == ()


def test_selected_set_matches_report_exactly():
    data = _single_signal_dataset(n=400, m=6, seed=2)
    result = select_fixed(data, GBT, iterations=8, alpha=0.05, seed=3)
    expected = {
        n for n, p in zip(result.report.feature_names, result.report.p_values) if p < 0.05
    }
    assert set(result.selected) == expected


def test_automatic_terminates_on_strong_signal():
    data = _single_signal_dataset(n=800, m=8, seed=3)
    cfg = PowershapConfig()
    result = select_automatic(data, GBT, cfg)
    assert result.iterations_performed == cfg.initial_iterations
    assert "f0" in result.selected
    assert not result.truncated


def test_automatic_all_noise_stops_after_initial_block():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(400, 6))
    y = rng.normal(size=400)
    data = validate_dataset(X, y, [f"f{i}" for i in range(6)], Task.REGRESSION)
    result = select_automatic(data, GBT, PowershapConfig(base_seed=2))
    assert result.iterations_performed == 10
    assert result.selected == ()


def test_automatic_grows_for_borderline_feature_and_covers_demand():
    # weak-but-real signal: effect size ends up moderate, demanding > 10 runs
    rng = np.random.default_rng(5)
    n = 600
    X = rng.normal(size=(n, 5))
    y = 0.35 * X[:, 0] + rng.normal(size=n)
    data = validate_dataset(X, y, [f"f{i}" for i in range(5)], Task.REGRESSION)
    cfg = PowershapConfig(base_seed=1, max_iterations=60)
    result = select_automatic(data, GBT, cfg)
    rep = result.report
    if result.iterations_performed > cfg.initial_iterations and not result.truncated:
        demands = rep.required_iterations[
            (rep.p_values < cfg.alpha) & np.isfinite(rep.required_iterations)
        ]
        assert result.iterations_performed >= math.ceil(demands.max())
    assert result.iterations_performed <= cfg.max_iterations


def test_automatic_iteration_cap_sets_truncated_flag():
    rng = np.random.default_rng(6)
    n = 500
    X = rng.normal(size=(n, 4))
    y = 0.28 * X[:, 0] + rng.normal(size=n)
    data = validate_dataset(X, y, [f"f{i}" for i in range(4)], Task.REGRESSION)
    # cap barely above the initial block: any demand > 12 must truncate
    cfg = PowershapConfig(base_seed=0, initial_iterations=10, max_iterations=12)
    result = select_automatic(data, GBT, cfg)
    assert result.iterations_performed <= 12
    rep = result.report
    demands = rep.required_iterations[
        (rep.p_values < cfg.alpha) & np.isfinite(rep.required_iterations)
    ]
    if demands.size and math.ceil(demands.max()) > result.iterations_performed:
        assert result.truncated


def test_rerun_reproduces_identical_result():
    data = _single_signal_dataset(n=400, m=6, seed=7)
    cfg = PowershapConfig(base_seed=9)
    a = select_automatic(data, GBT, cfg)
    b = select_automatic(data, GBT, cfg)
    assert a.selected == b.selected
    assert a.iterations_performed == b.iterations_performed
    assert np.array_equal(a.report.p_values, b.report.p_values)
    assert np.array_equal(a.report.effect_sizes, b.report.effect_sizes)


def test_convergence_immediate_fixpoint_equals_automatic():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(300, 5))
    y = rng.normal(size=300)
    data = validate_dataset(X, y, [f"f{i}" for i in range(5)], Task.REGRESSION)
    cfg = PowershapConfig(base_seed=3, mode=Mode.CONVERGENCE)
    conv = select_convergence(data, GBT, cfg)
    auto = select_automatic(data, GBT, cfg)
    assert conv.selected == auto.selected == ()
    assert len(conv.rounds) == 1
    assert conv.iterations_performed == auto.iterations_performed
    assert np.array_equal(conv.report.p_values, auto.report.p_values)


def test_convergence_keeps_round_one_picks_and_adds_weak_signal():
    rng = np.random.default_rng(9)
    n = 1500
    X = rng.normal(size=(n, 8))
    y = X[:, 0] + 0.05 * X[:, 1] + 0.02 * rng.normal(size=n)
    data = validate_dataset(X, y, [f"f{i}" for i in range(8)], Task.REGRESSION)
    cfg = PowershapConfig(base_seed=0, mode=Mode.CONVERGENCE)
    auto = select_automatic(data, GBT, cfg)
    conv = select_convergence(data, GBT, cfg)
    assert set(auto.selected) <= set(conv.selected)
    assert "f0" in conv.selected
    assert "f1" in conv.selected
    # rounds pick disjoint features; union has no duplicates
    seen = set()
    for rnd in conv.rounds:
        assert not (seen & set(rnd.selected))
        seen |= set(rnd.selected)
    assert len(conv.selected) == len(set(conv.selected))


def test_probe_never_selected():
    data = _single_signal_dataset(n=300, m=3, seed=10)
    for result in (
        select_fixed(data, GBT, iterations=6, alpha=0.5, seed=0),
        select_automatic(data, GBT, PowershapConfig(alpha=0.5)),
    ):
        assert PROBE_NAME not in result.selected
        assert PROBE_NAME not in result.report.feature_names


def test_fixed_mode_null_monte_carlo():
    # pure-noise target at I=10, alpha=0.01: empty selection in >= 18/20
    # seeded runs with a right-sized learner
    learner = LearnerSpec(n_estimators=10, max_depth=2, split_noise=2.0)
    empty = 0
    for seed in range(20):
        rng = np.random.default_rng(9000 + seed)
        X = rng.normal(size=(500, 10))
        y = (rng.uniform(size=500) > 0.5).astype(float)
        data = validate_dataset(
            X, y, [f"f{i}" for i in range(10)], Task.BINARY_CLASSIFICATION
        )
        result = select_fixed(data, learner, iterations=10, alpha=0.01, seed=seed)
        empty += not result.selected
    assert empty >= 18
