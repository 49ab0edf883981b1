"""Two small built-in models: ridge linear regression and logistic regression."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import expit


class SingularFitError(ValueError):
    pass


@dataclass(frozen=True)
class PredictiveModel:
    kind: str
    weights: np.ndarray = field(repr=False)
    intercept: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "logistic"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float).ravel())

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.d:
            raise ValueError(f"expected {self.d} features, got {X.shape[-1]}")
        z = X @ self.weights + self.intercept
        return z if self.kind == "linear" else expit(z)

    __call__ = predict

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "weights": self.weights.tolist(), "intercept": self.intercept}
        )

    @classmethod
    def from_json(cls, text: str) -> PredictiveModel:
        doc = json.loads(text)
        return cls(doc["kind"], np.asarray(doc["weights"], dtype=float), float(doc["intercept"]))


def predict(model: PredictiveModel, X) -> np.ndarray:
    return model.predict(X)


def fit_linear(X, y, ridge: float = 0.0) -> PredictiveModel:
    """Least squares with an unpenalized intercept via the normal equations."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if n < 1 or y.shape[0] != n:
        raise ValueError("X and y must have the same positive number of rows")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    Xa = np.hstack([X, np.ones((n, 1))])
    G = Xa.T @ Xa
    G[:d, :d] += ridge * np.eye(d)
    try:
        cho = scipy.linalg.cho_factor(G)
    except np.linalg.LinAlgError as exc:
        raise SingularFitError("normal equations are singular; use ridge > 0") from exc
    if np.linalg.cond(G) > 1e14:
        raise SingularFitError("normal equations are numerically singular; use ridge > 0")
    coef = scipy.linalg.cho_solve(cho, Xa.T @ y)
    return PredictiveModel("linear", coef[:d], float(coef[d]))


def fit_logistic(X, y, l2: float = 1e-2, max_iter: int = 100, tol: float = 1e-8) -> PredictiveModel:
    """Newton iterations on the mean logistic loss plus ``l2/2 ||w||^2``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("logistic regression needs labels in {0, 1}")
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    penalty = np.full(d + 1, l2)
    penalty[d] = 0.0
    w = np.zeros(d + 1)
    for _ in range(max_iter):
        p = expit(Xa @ w)
        grad = Xa.T @ (p - y) / n + penalty * w
        if np.linalg.norm(grad) < tol:
            break
        H = (Xa * (p * (1 - p))[:, None]).T @ Xa / n + np.diag(penalty)
        H += 1e-12 * np.eye(d + 1)
        w = w - np.linalg.lstsq(H, grad, rcond=None)[0]
        if not np.all(np.isfinite(w)):
            raise FloatingPointError("logistic fit diverged")
    return PredictiveModel("logistic", w[:d], float(w[d]))
