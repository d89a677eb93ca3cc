"""Gradient-boosted trees with exact greedy splits and Newton leaf values.

Squared-error loss for regression, logistic loss for binary classification
(raw predictions are log-odds). Classification uses inverse-frequency
sample weights so class imbalance does not skew the boosting gradients.

Every tree is grown under Bayesian-bootstrap loss weights (seeded unit
exponentials on top of the base weights) and with multiplicative dither on
split scores, so refitting with a different seed re-randomizes which
chance alignments a pure-noise fit exploits; that is what keeps
probe-comparison p-values calibrated. A fixed seed still gives a
bit-identical model at any thread count. There is no early stopping.
"""

from __future__ import annotations

import numpy as np

from ..domain import Task
from ..errors import DegenerateTraining
from . import _kernels


class TreeEnsembleModel:
    """Fitted boosted ensemble packed into flat arrays for the kernels."""

    kind = "gradient_boosted_trees"

    def __init__(self, task, spec, base_score, feature, threshold, left, right,
                 value, cover, offsets, n_features):
        self.task = task
        self.spec = spec
        self.base_score = float(base_score)
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self.cover = cover
        self.offsets = offsets
        self.n_features = n_features
        self.learning_rate = spec.learning_rate
        self.base_value = self._expected_value()

    @property
    def n_trees(self) -> int:
        return self.offsets.shape[0] - 1

    def _expected_value(self) -> float:
        total = self.base_score
        for t in range(self.n_trees):
            lo, hi = self.offsets[t], self.offsets[t + 1]
            total += self.learning_rate * _kernels.tree_expected_value(
                self.feature[lo:hi],
                self.left[lo:hi],
                self.right[lo:hi],
                self.value[lo:hi],
                self.cover[lo:hi],
            )
        return float(total)

    def predict_raw(self, X: np.ndarray) -> np.ndarray:
        out = np.full(X.shape[0], self.base_score)
        for t in range(self.n_trees):
            lo, hi = self.offsets[t], self.offsets[t + 1]
            _kernels.predict_tree_into(
                self.feature[lo:hi],
                self.threshold[lo:hi],
                self.left[lo:hi],
                self.right[lo:hi],
                self.value[lo:hi],
                X,
                self.learning_rate,
                out,
            )
        return out

    def shap(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros((X.shape[0], self.n_features))
        _kernels.shap_ensemble(
            X,
            self.feature,
            self.threshold,
            self.left,
            self.right,
            self.value,
            self.cover,
            self.offsets,
            self.spec.max_depth,
            self.learning_rate,
            out,
        )
        return out


def fit_gbt(
    X: np.ndarray, y: np.ndarray, task: Task, spec, sample_weight, seed: int = 0
) -> TreeEnsembleModel:
    n, m = X.shape
    w = sample_weight
    w_sum = w.sum()
    if w_sum <= 0:
        raise DegenerateTraining("sample weights sum to zero")

    if task is Task.REGRESSION:
        base = float((w * y).sum() / w_sum)
    else:
        p_bar = float((w * y).sum() / w_sum)
        p_bar = min(max(p_bar, 1e-12), 1.0 - 1e-12)
        base = float(np.log(p_bar / (1.0 - p_bar)))

    sort_idx_t = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)
    pred = np.full(n, base)
    rng = np.random.default_rng(seed)

    feats, thrs, lefts, rights, vals, covs = [], [], [], [], [], []
    offsets = [0]
    for _ in range(spec.n_estimators):
        wt = w * rng.standard_exponential(n)
        if task is Task.REGRESSION:
            g = wt * (pred - y)
            h = wt.copy()
        else:
            p = 1.0 / (1.0 + np.exp(-np.clip(pred, -36.0, 36.0)))
            g = wt * (p - y)
            h = wt * p * (1.0 - p)
        tree_seed = int(rng.integers(0, 2**31 - 1))
        tree = _kernels.grow_tree(
            X, g, h, wt, sort_idx_t, spec.min_samples_leaf, spec.max_depth,
            spec.leaf_l2, spec.split_noise, tree_seed,
        )
        feature, threshold, left, right, value, cover = tree
        feats.append(feature)
        thrs.append(threshold)
        lefts.append(left)
        rights.append(right)
        vals.append(value)
        covs.append(cover)
        offsets.append(offsets[-1] + feature.shape[0])
        _kernels.predict_tree_into(
            feature, threshold, left, right, value, X, spec.learning_rate, pred
        )
        if feature.shape[0] == 1 and value[0] == 0.0:
            # Residuals are exhausted; further trees would be identical
            # zero-valued stumps.
            break

    return TreeEnsembleModel(
        task=task,
        spec=spec,
        base_score=base,
        feature=np.concatenate(feats),
        threshold=np.concatenate(thrs),
        left=np.concatenate(lefts),
        right=np.concatenate(rights),
        value=np.concatenate(vals),
        cover=np.concatenate(covs),
        offsets=np.asarray(offsets, dtype=np.int64),
        n_features=m,
    )
