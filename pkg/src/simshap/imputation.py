"""Fill in features that a coalition removes."""

from __future__ import annotations

import numpy as np


class MarginalImputer:
    """Impute removed features from every row of a background set."""

    kind = "marginal-background"

    def __init__(self, background):
        rows = np.atleast_2d(np.asarray(background, dtype=float))
        if rows.shape[0] < 1:
            raise ValueError("background set is empty")
        self.rows = rows

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def complete_batch(self, x, Z) -> np.ndarray:
        """Completions for many coalitions at once, shape ``(m, n_rows, d)``."""
        x = _check(x, self.d)
        Z = np.asarray(Z).astype(bool)
        if Z.ndim != 2 or Z.shape[1] != self.d:
            raise ValueError(f"coalitions must have {self.d} columns")
        return np.where(Z[:, None, :], x[None, None, :], self.rows[None, :, :])

    def complete(self, x, z) -> np.ndarray:
        z = np.asarray(z).astype(bool)
        if z.all():
            return _check(x, self.d)[None, :].copy()
        return self.complete_batch(x, z[None, :])[0]


class MeanImputer:
    """Impute removed features with a fixed mean vector."""

    kind = "mean"

    def __init__(self, mean):
        self.mean = np.asarray(mean, dtype=float).ravel()

    @classmethod
    def from_data(cls, X) -> MeanImputer:
        return cls(np.asarray(X, dtype=float).mean(axis=0))

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def complete_batch(self, x, Z) -> np.ndarray:
        x = _check(x, self.d)
        Z = np.asarray(Z).astype(bool)
        if Z.ndim != 2 or Z.shape[1] != self.d:
            raise ValueError(f"coalitions must have {self.d} columns")
        return np.where(Z, x[None, :], self.mean[None, :])[:, None, :]

    def complete(self, x, z) -> np.ndarray:
        return self.complete_batch(x, np.asarray(z)[None, :])[0]


def _check(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != d:
        raise ValueError(f"instance has {x.shape[0]} features, imputer expects {d}")
    return x


def complete(imputer, x, z) -> np.ndarray:
    return imputer.complete(x, z)
