"""Cooperative games over feature coalitions.

Every game exposes ``d``, a precomputed ``boundary`` (values of the empty and
full coalitions) and ``evaluate_batch`` over an ``(m, d)`` coalition array.
Stochastic games additionally refresh internal state in ``begin_iteration``,
which estimators call once per iteration before evaluating that iteration's
coalitions.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from simshap.coalitions import GameBoundary, check_enumerable, coalition_indices
from simshap.sampling import make_rng

PROB_CLAMP = 1e-12


class CooperativeGame:
    d: int
    boundary: GameBoundary

    def evaluate_batch(self, Z) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, z) -> float:
        return float(self.evaluate_batch(np.asarray(z)[None, :])[0])

    def begin_iteration(self) -> None:
        pass

    def _init_boundary(self) -> None:
        ends = np.vstack([np.zeros(self.d, dtype=np.int8), np.ones(self.d, dtype=np.int8)])
        v = self.evaluate_batch(ends)
        self.boundary = GameBoundary(float(v[0]), float(v[1]))


def squared_loss(pred, y):
    return (pred - y) ** 2


def cross_entropy(pred, y):
    p = np.clip(pred, PROB_CLAMP, 1 - PROB_CLAMP)
    return -(y * np.log(p) + (1 - y) * np.log(1 - p))


LOSSES = {"mse": squared_loss, "ce": cross_entropy}


class LocalGame(CooperativeGame):
    """Prediction game or negative prediction-loss game for one instance.

    The imputed predictions are averaged before the loss is applied, so the
    loss game scores ``-loss(E[f(x_S, X_rest)], y)``.
    """

    def __init__(self, model, imputer, x, y=None, kind: str = "loss", loss: str = "mse",
                 target_class: int | None = None):
        if kind not in ("loss", "prediction"):
            raise ValueError(f"unknown game kind {kind!r}")
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != imputer.d:
            raise ValueError(f"instance has {x.shape[0]} features, imputer expects {imputer.d}")
        model_d = getattr(model, "d", None)
        if model_d is not None and model_d != imputer.d:
            raise ValueError(f"model expects {model_d} features, imputer provides {imputer.d}")
        if kind == "loss":
            if y is None:
                raise ValueError("the loss game needs a label")
            if loss not in LOSSES:
                raise ValueError(f"unknown loss {loss!r}")
            if loss == "ce" and getattr(model, "kind", None) == "linear":
                raise ValueError("cross-entropy needs probability outputs, model is linear")
        self.model = model
        self.imputer = imputer
        self.x = x
        self.y = y
        self.kind = kind
        self.loss = loss
        self.target_class = target_class
        self.d = x.shape[0]
        self._init_boundary()
        if kind == "loss" and loss == "ce":
            p = self._mean_prediction(np.ones((1, self.d), dtype=np.int8))
            if np.any((p < 0) | (p > 1)):
                raise ValueError("cross-entropy needs model outputs in [0, 1]")

    def _mean_prediction(self, Z) -> np.ndarray:
        X = self.imputer.complete_batch(self.x, Z)
        m, r, d = X.shape
        pred = np.asarray(self.model(X.reshape(m * r, d)), dtype=float).reshape(m, r)
        return pred.mean(axis=1)

    def evaluate_batch(self, Z) -> np.ndarray:
        Z = np.asarray(Z)
        out = np.empty(Z.shape[0])
        full = Z.all(axis=1)
        # Nothing to impute for the full coalition: evaluate f(x) directly.
        if full.any():
            out[full] = float(np.asarray(self.model(self.x[None, :]), dtype=float)[0])
        if (~full).any():
            out[~full] = self._mean_prediction(Z[~full])
        if self.kind == "prediction":
            if self.target_class == 0:
                out = 1.0 - out
            return out
        return -LOSSES[self.loss](out, self.y)


def loss_game_local(model, imputer, x, y, loss: str = "mse") -> LocalGame:
    return LocalGame(model, imputer, x, y, kind="loss", loss=loss)


def prediction_game_local(model, imputer, x, target_class: int | None = None) -> LocalGame:
    return LocalGame(model, imputer, x, kind="prediction", target_class=target_class)


class GlobalGame(CooperativeGame):
    """Average of local games over a reference set.

    Boundary values average over the whole reference set. Other coalitions
    average over a mini-batch of ``batch_size`` reference instances drawn
    without replacement, refreshed by ``begin_iteration``.
    """

    def __init__(self, local_factory: Callable, X_ref, y_ref=None, batch_size: int = 512,
                 seed: int = 0):
        X_ref = np.atleast_2d(np.asarray(X_ref, dtype=float))
        n = X_ref.shape[0]
        if n < 1:
            raise ValueError("reference set is empty")
        if y_ref is None:
            y_ref = [None] * n
        if len(y_ref) != n:
            raise ValueError("reference labels and rows differ in length")
        if batch_size > n:
            raise ValueError(f"batch size {batch_size} exceeds reference set size {n}")
        self.locals = [local_factory(X_ref[i], y_ref[i]) for i in range(n)]
        self.d = self.locals[0].d
        self.batch_size = batch_size
        self.rng = make_rng(seed)
        self.batch: np.ndarray | None = None
        v0 = np.mean([g.boundary.v_empty for g in self.locals])
        v1 = np.mean([g.boundary.v_full for g in self.locals])
        self.boundary = GameBoundary(float(v0), float(v1))

    def begin_iteration(self) -> None:
        n = len(self.locals)
        if self.batch_size == n:
            self.batch = np.arange(n)
        else:
            self.batch = np.sort(self.rng.choice(n, size=self.batch_size, replace=False))

    def evaluate_batch(self, Z) -> np.ndarray:
        if self.batch is None:
            self.begin_iteration()
        vals = np.array([self.locals[j].evaluate_batch(Z) for j in self.batch])
        return vals.mean(axis=0)


def global_game(local_factory: Callable, X_ref, y_ref=None, batch_size: int = 512,
                seed: int = 0) -> GlobalGame:
    return GlobalGame(local_factory, X_ref, y_ref, batch_size=batch_size, seed=seed)


class TabulatedGame(CooperativeGame):
    """Game given by an explicit value for each of the 2**d coalitions."""

    def __init__(self, values, d: int | None = None):
        if isinstance(values, dict):
            if d is None:
                raise ValueError("d is required when the table is a mapping")
            check_enumerable(d)
            missing = [i for i in range(1 << d) if i not in values]
            if missing:
                raise ValueError(f"table is missing coalition indices {missing[:10]}")
            values = [values[i] for i in range(1 << d)]
        values = np.asarray(values, dtype=float).ravel()
        n = values.shape[0]
        inferred = n.bit_length() - 1
        if d is None:
            d = inferred
        check_enumerable(d)
        if n != 1 << d:
            raise ValueError(f"table has {n} entries, expected 2**{d} = {1 << d}")
        self.d = d
        self.values = values
        self.boundary = GameBoundary(float(values[0]), float(values[-1]))

    def evaluate_batch(self, Z) -> np.ndarray:
        return self.values[coalition_indices(Z)]


def tabulated_game(table, d: int | None = None) -> TabulatedGame:
    return TabulatedGame(table, d)
