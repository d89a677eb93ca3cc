"""Brute-force exact Shapley values by coalition enumeration.

Test oracle only: cost is O(2^m) per row, capped at m <= 12. The value
function mirrors each backend's conditioning so the oracle and the fast
explainer estimate the same game: trees marginalize unplayed features by
their training cover weights, the linear model by background column means.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DimensionMismatch, TooManyFeatures
from .boosting import TreeEnsembleModel
from .linear import LinearModel

_MAX_ORACLE_FEATURES = 12


def _tree_cond_exp(model, tree_index, x, mask):
    lo = model.offsets[tree_index]
    feature = model.feature
    threshold = model.threshold
    left = model.left
    right = model.right
    value = model.value
    cover = model.cover

    def rec(node):
        gnode = lo + node
        f = feature[gnode]
        if f < 0:
            return value[gnode]
        if (mask >> f) & 1:
            child = left[gnode] if x[f] <= threshold[gnode] else right[gnode]
            return rec(child)
        lc, rc = left[gnode], right[gnode]
        return (
            cover[lo + lc] * rec(lc) + cover[lo + rc] * rec(rc)
        ) / cover[gnode]

    return rec(0)


def _coalition_value(model, x, mask, bg_means):
    if isinstance(model, TreeEnsembleModel):
        total = model.base_score
        for t in range(model.n_trees):
            total += model.learning_rate * _tree_cond_exp(model, t, x, mask)
        return total
    if isinstance(model, LinearModel):
        out = model.intercept
        for j in range(model.n_features):
            out += model.weights[j] * (x[j] if (mask >> j) & 1 else bg_means[j])
        return out
    raise DimensionMismatch(f"unsupported model type {type(model).__name__}")


def exact_shapley_oracle(model, eval_rows, background=None) -> np.ndarray:
    """Exact Shapley attribution for every row by enumerating coalitions."""
    X = np.asarray(eval_rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"eval rows must be 2-D with {model.n_features} columns"
        )
    m = model.n_features
    if m > _MAX_ORACLE_FEATURES:
        raise TooManyFeatures(f"oracle enumeration capped at {_MAX_ORACLE_FEATURES} features")

    if background is not None:
        bg = np.asarray(background, dtype=np.float64)
        if bg.ndim != 2 or bg.shape[1] != m:
            raise DimensionMismatch("background must be 2-D with matching columns")
        bg_means = bg.mean(axis=0)
    elif isinstance(model, LinearModel):
        bg_means = model.train_means
    else:
        bg_means = None

    n_masks = 1 << m
    coef = np.array(
        [math.factorial(s) * math.factorial(m - s - 1) / math.factorial(m) for s in range(m)]
    )
    out = np.zeros((X.shape[0], m))
    for r in range(X.shape[0]):
        x = X[r]
        v = np.empty(n_masks)
        for mask in range(n_masks):
            v[mask] = _coalition_value(model, x, mask, bg_means)
        for j in range(m):
            bit = 1 << j
            phi = 0.0
            for mask in range(n_masks):
                if mask & bit:
                    continue
                phi += coef[mask.bit_count()] * (v[mask | bit] - v[mask])
            out[r, j] = phi
    return out
