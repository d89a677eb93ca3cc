"""Selection core: turn an impact matrix into p-values, effect sizes, and
required iteration counts, and orchestrate the fixed / automatic /
convergence selection modes.

The p-value of feature j is the fraction of iterations in which the
probe's mean impact exceeded j's impact, so small p means the feature
consistently beats a random column. Automatic mode grows the iteration
count until it covers the largest solver demand among significant
features, in chunks of at most ten, re-analyzing after each chunk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .domain import (
    Dataset,
    FeatureReport,
    ImpactMatrix,
    Mode,
    PowershapConfig,
    PValueStyle,
    SelectionResult,
    SelectionRound,
)
from .errors import TooFewIterations, ZeroPooledStd
from .explain import ExplainPlan, explain, explain_append
from .models import LearnerSpec
from .stats import (
    UNATTAINABLE,
    MIN_ITERATIONS,
    PowerQuery,
    effect_size,
    percentile,
    percentile_corrected,
    solve_required_iterations,
)

# Seed offset between convergence rounds; larger than any reachable
# iteration count so per-iteration seeds never collide across rounds.
_ROUND_SEED_STRIDE = 1_000_003


@dataclass(frozen=True, eq=False)
class AnalysisOutput:
    report: FeatureReport
    probe_mean: float


def analyze(
    values: ImpactMatrix,
    alpha: float,
    target_power: float,
    p_value_style: PValueStyle = PValueStyle.ANTICONSERVATIVE,
) -> AnalysisOutput:
    """Per-feature p-value, Cohen's d against the probe column, and the
    solver's required iteration count.

    A zero pooled standard deviation (both columns constant) makes the
    effect unbounded: the report carries +/-inf for it, and the required
    iterations collapse to the minimum when the feature mean beats the
    probe mean, or to the unattainable sentinel otherwise.
    """
    if values.iterations < 2:
        raise TooFewIterations("analysis needs at least 2 iterations")
    p_fn = (
        percentile
        if p_value_style is PValueStyle.ANTICONSERVATIVE
        else percentile_corrected
    )
    # Selection thresholds admit the degenerate extremes alpha = 0 and 1;
    # the power solver needs an interior value.
    solver_alpha = min(max(alpha, 1e-12), 1.0 - 1e-12)
    probe_col = values.probe_column
    probe_mean = float(probe_col.mean())
    m = values.n_features

    p_values = np.empty(m)
    effects = np.empty(m)
    required = np.empty(m)
    impacts = np.empty(m)
    for j in range(m):
        col = values.feature_column(j)
        p_values[j] = p_fn(col, probe_mean)
        impacts[j] = col.mean()
        try:
            d = effect_size(col, probe_col)
            effects[j] = d
            required[j] = solve_required_iterations(
                PowerQuery(alpha=solver_alpha, target_power=target_power, effect_size=d)
            )
        except ZeroPooledStd:
            if impacts[j] > probe_mean:
                effects[j] = math.inf
                required[j] = MIN_ITERATIONS
            elif impacts[j] < probe_mean:
                effects[j] = -math.inf
                required[j] = UNATTAINABLE
            else:
                effects[j] = 0.0
                required[j] = UNATTAINABLE

    report = FeatureReport(
        feature_names=values.feature_names,
        p_values=p_values,
        effect_sizes=effects,
        required_iterations=required,
        mean_impacts=impacts,
    )
    return AnalysisOutput(report=report, probe_mean=probe_mean)


def _selected_names(report: FeatureReport, alpha: float) -> tuple[str, ...]:
    # Strict inequality: ties at p == alpha are excluded.
    return tuple(
        name
        for name, p in zip(report.feature_names, report.p_values)
        if p < alpha
    )


def select_fixed(
    data: Dataset,
    learner: LearnerSpec,
    iterations: int,
    alpha: float,
    seed: int = 0,
    *,
    val_fraction: float = 0.2,
    target_power: float = 0.99,
    p_value_style: PValueStyle = PValueStyle.ANTICONSERVATIVE,
) -> SelectionResult:
    """Fixed-iteration selection: explain I times, keep features with p < alpha."""
    plan = ExplainPlan(
        iterations=iterations, learner=learner, base_seed=seed, val_fraction=val_fraction
    )
    matrix = explain(plan, data)
    analysis = analyze(matrix, alpha, target_power, p_value_style)
    selected = _selected_names(analysis.report, alpha)
    rnd = SelectionRound(
        selected=selected, report=analysis.report, iterations=iterations, truncated=False
    )
    return SelectionResult(
        selected=selected,
        report=analysis.report,
        iterations_performed=iterations,
        truncated=False,
        rounds=(rnd,),
    )


def select_automatic(
    data: Dataset, learner: LearnerSpec, config: PowershapConfig
) -> SelectionResult:
    """Automatic mode: size the iteration count by statistical power.

    Starts with the initial block, then repeatedly appends
    min(10, demand - performed) iterations while the largest finite
    required-iteration count among significant features exceeds the
    iterations already performed. Hitting max_iterations is not an error;
    the result is flagged truncated instead. Unattainable (sentinel)
    demands never drive the loop.
    """
    plan = ExplainPlan(
        iterations=config.initial_iterations,
        learner=learner,
        base_seed=config.base_seed,
        val_fraction=config.val_fraction,
    )
    matrix = explain(plan, data)
    performed = config.initial_iterations

    truncated = False
    while True:
        analysis = analyze(
            matrix, config.alpha, config.required_power, config.p_value_style
        )
        rep = analysis.report
        significant = rep.p_values < config.alpha
        finite = np.isfinite(rep.required_iterations)
        demands = rep.required_iterations[significant & finite]
        demand = int(math.ceil(demands.max())) if demands.size else 0
        if demand <= performed:
            break
        if performed >= config.max_iterations:
            truncated = True
            break
        extra = min(10, demand - performed, config.max_iterations - performed)
        matrix = explain_append(matrix, extra, plan, data)
        performed += extra

    selected = _selected_names(rep, config.alpha)
    rnd = SelectionRound(
        selected=selected, report=rep, iterations=performed, truncated=truncated
    )
    return SelectionResult(
        selected=selected,
        report=rep,
        iterations_performed=performed,
        truncated=truncated,
        rounds=(rnd,),
    )


def select_convergence(
    data: Dataset, learner: LearnerSpec, config: PowershapConfig
) -> SelectionResult:
    """Recursive automatic mode: re-run with previously selected features
    removed until a round selects nothing or no features remain.

    The returned selection is the union across rounds in the dataset's
    original feature order; the top-level report is round 1's (it covers
    the full feature set), and per-round reports live in ``rounds``.
    """
    remaining = data
    chosen: set[str] = set()
    rounds: list[SelectionRound] = []
    total_iterations = 0
    first_report: FeatureReport | None = None
    round_index = 0

    while remaining.n_features > 0:
        round_config = replace(
            config, base_seed=config.base_seed + round_index * _ROUND_SEED_STRIDE
        )
        result = select_automatic(remaining, learner, round_config)
        rounds.append(result.rounds[0])
        total_iterations += result.iterations_performed
        if first_report is None:
            first_report = result.report
        if not result.selected:
            break
        chosen.update(result.selected)
        remaining = remaining.drop_features(set(result.selected))
        round_index += 1

    selected = tuple(name for name in data.feature_names if name in chosen)
    assert first_report is not None
    return SelectionResult(
        selected=selected,
        report=first_report,
        iterations_performed=total_iterations,
        truncated=any(r.truncated for r in rounds),
        rounds=tuple(rounds),
    )


def run_selection(
    data: Dataset, learner: LearnerSpec, config: PowershapConfig
) -> SelectionResult:
    """Dispatch on config.mode."""
    if config.mode is Mode.FIXED:
        return select_fixed(
            data,
            learner,
            iterations=config.fixed_iterations,
            alpha=config.alpha,
            seed=config.base_seed,
            val_fraction=config.val_fraction,
            target_power=config.required_power,
            p_value_style=config.p_value_style,
        )
    if config.mode is Mode.AUTOMATIC:
        return select_automatic(data, learner, config)
    return select_convergence(data, learner, config)
