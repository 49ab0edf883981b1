"""Coalition sampling from the Shapley kernel distribution.

Draws are two-stage: a subset size k from the normalized per-size kernel mass,
then a uniform k-subset. Randomness comes from numpy's PCG64 bit generator,
whose output stream is fixed across platforms for a given seed.
"""

from __future__ import annotations

import numpy as np

from simshap.coalitions import size_masses


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class KernelSampler:
    def __init__(self, d: int, seed: int = 0, paired: bool = False):
        if d < 2:
            raise ValueError(f"kernel sampling needs d >= 2, got {d}")
        self.d = d
        self.paired = paired
        self.seed = seed
        mass = size_masses(d)
        self.size_distribution = mass / mass.sum()
        self._cdf = np.cumsum(self.size_distribution)
        self._cdf[-1] = 1.0
        self.rng = make_rng(seed)

    @property
    def size_law(self) -> dict[int, float]:
        return {k + 1: float(p) for k, p in enumerate(self.size_distribution)}

    def _draw(self, n: int) -> np.ndarray:
        sizes = np.searchsorted(self._cdf, self.rng.random(n), side="right") + 1
        sizes = np.minimum(sizes, self.d - 1)
        # Ranking i.i.d. uniform keys gives a uniform random permutation per row;
        # the first k positions of it form a uniform k-subset.
        keys = self.rng.random((n, self.d))
        ranks = keys.argsort(axis=1).argsort(axis=1)
        return (ranks < sizes[:, None]).astype(np.int8)

    def sample(self, m: int) -> np.ndarray:
        """Return an ``(m, d)`` int8 array of admissible coalitions."""
        if m < 1:
            raise ValueError(f"batch size must be positive, got {m}")
        if not self.paired:
            return self._draw(m)
        if m % 2:
            raise ValueError(f"paired sampling needs an even batch size, got {m}")
        half = self._draw(m // 2)
        out = np.empty((m, self.d), dtype=np.int8)
        out[0::2] = half
        out[1::2] = 1 - half
        return out


def build_sampler(d: int, seed: int = 0, paired: bool = False) -> KernelSampler:
    return KernelSampler(d, seed=seed, paired=paired)


def sample_batch(sampler: KernelSampler, m: int) -> np.ndarray:
    return sampler.sample(m)
