"""Shapley-value feature selection against an injected random probe,
with power-analysis-sized iteration counts."""

from .domain import (
    Dataset,
    FeatureReport,
    ImpactMatrix,
    Mode,
    PowershapConfig,
    PValueStyle,
    SelectionResult,
    SelectionRound,
    Task,
    validate_dataset,
)
from .explain import ExplainPlan, explain, explain_append
from .models import LearnerKind, LearnerSpec
from .selection import (
    analyze,
    run_selection,
    select_automatic,
    select_convergence,
    select_fixed,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "ExplainPlan",
    "FeatureReport",
    "ImpactMatrix",
    "LearnerKind",
    "LearnerSpec",
    "Mode",
    "PowershapConfig",
    "PValueStyle",
    "SelectionResult",
    "SelectionRound",
    "Task",
    "analyze",
    "explain",
    "explain_append",
    "run_selection",
    "select_automatic",
    "select_convergence",
    "select_fixed",
    "validate_dataset",
    "__version__",
]
