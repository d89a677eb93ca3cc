"""Linear learners: ridge regression and L2-penalized logistic regression.

Both are deterministic closed-form / Newton fits. Attributions are the
closed-form linear SHAP values phi_j = w_j * (x_j - mu_j) with mu the
training column means; for classification they live in log-odds space,
where additivity is exact.
"""

from __future__ import annotations

import numpy as np

from ..domain import Task


class LinearModel:
    """Fitted linear (or logistic, in raw-score space) model."""

    kind = "linear"

    def __init__(self, weights, intercept, train_means, task, spec):
        self.weights = weights
        self.intercept = float(intercept)
        self.train_means = train_means
        self.task = task
        self.spec = spec
        self.n_features = weights.shape[0]
        # Expected raw output over the training rows; linearity makes this
        # exactly the output at the mean row.
        self.base_value = float(intercept + weights @ train_means)

    def predict_raw(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights + self.intercept

    def shap(self, X: np.ndarray) -> np.ndarray:
        return (X - self.train_means) * self.weights


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_linear(X: np.ndarray, y: np.ndarray, task: Task, spec, sample_weight) -> LinearModel:
    n, m = X.shape
    lam = spec.l2_penalty
    means = X.mean(axis=0)

    if task is Task.REGRESSION:
        Xc = X - means
        yc = y - y.mean()
        A = Xc.T @ Xc + lam * np.eye(m)
        w = np.linalg.solve(A, Xc.T @ yc)
        intercept = y.mean() - w @ means
        return LinearModel(w, intercept, means, task, spec)

    # Logistic regression via damped Newton; the intercept is unpenalized.
    Z = np.column_stack([X, np.ones(n)])
    beta = np.zeros(m + 1)
    ridge = lam * np.ones(m + 1)
    ridge[m] = 0.0
    for _ in range(100):
        p = _sigmoid(Z @ beta)
        grad = Z.T @ (sample_weight * (y - p)) - ridge * beta
        r = sample_weight * p * (1.0 - p) + 1e-12
        H = (Z * r[:, None]).T @ Z + np.diag(ridge + 1e-12)
        step = np.linalg.solve(H, grad)
        big = np.max(np.abs(step))
        if big > 10.0:
            step *= 10.0 / big
        beta = beta + step
        if big < 1e-10:
            break
    return LinearModel(beta[:m], beta[m], means, task, spec)
