"""Versioned JSON run reports.

Schema v1. Non-finite statistics serialize as null: a null
required_iterations means the demand is unattainable at any iteration
count, a null effect_size means the pooled spread degenerated to zero.
Feature order always matches the input order. The wall_time_s field is
the only part of a report that may differ between identical runs.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .domain import FeatureReport, SelectionResult

SCHEMA_VERSION = 1


def _num(x: float) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _feature_table(report: FeatureReport) -> list[dict[str, Any]]:
    rows = []
    for j, name in enumerate(report.feature_names):
        rows.append(
            {
                "name": name,
                "p_value": _num(report.p_values[j]),
                "effect_size": _num(report.effect_sizes[j]),
                "required_iterations": _num(report.required_iterations[j]),
                "mean_impact": _num(report.mean_impacts[j]),
            }
        )
    return rows


def build_report(
    result: SelectionResult,
    *,
    config_echo: dict[str, Any],
    task: str,
    seed: int,
    wall_time_s: float,
) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "task": task,
        "seed": seed,
        "config": config_echo,
        "selected": list(result.selected),
        "iterations_performed": result.iterations_performed,
        "truncated": result.truncated,
        "features": _feature_table(result.report),
        "rounds": [
            {
                "round": i + 1,
                "selected": list(rnd.selected),
                "iterations": rnd.iterations,
                "truncated": rnd.truncated,
                "features": _feature_table(rnd.report),
            }
            for i, rnd in enumerate(result.rounds)
        ],
        "wall_time_s": wall_time_s,
    }


def render_json(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2) + "\n"
