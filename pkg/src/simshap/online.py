"""Streaming per-coordinate mean and variance (Welford / Chan)."""

from __future__ import annotations

import numpy as np


class WelfordAccumulator:
    """Running mean and sum of squared deviations over vector samples."""

    def __init__(self, d: int):
        self.count = 0
        self.mean = np.zeros(d)
        self.m2 = np.zeros(d)

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def update(self, sample) -> WelfordAccumulator:
        x = np.asarray(sample, dtype=float)
        if x.shape != self.mean.shape:
            raise ValueError(f"sample shape {x.shape} does not match d={self.d}")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite sample component")
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)
        return self

    @property
    def variance(self) -> np.ndarray:
        if self.count < 2:
            raise ValueError("variance needs at least two samples")
        return self.m2 / (self.count - 1)

    def standard_error(self) -> np.ndarray:
        return np.sqrt(self.variance / self.count)

    def merge(self, other: WelfordAccumulator) -> WelfordAccumulator:
        """Combine two accumulators as if all samples had been seen by one."""
        if other.d != self.d:
            raise ValueError("cannot merge accumulators of different dimension")
        out = WelfordAccumulator(self.d)
        n = self.count + other.count
        if n == 0:
            return out
        delta = other.mean - self.mean
        out.count = n
        out.mean = self.mean + delta * (other.count / n)
        out.m2 = self.m2 + other.m2 + delta**2 * (self.count * other.count / n)
        return out

    def copy(self) -> WelfordAccumulator:
        out = WelfordAccumulator(self.d)
        out.count, out.mean, out.m2 = self.count, self.mean.copy(), self.m2.copy()
        return out
