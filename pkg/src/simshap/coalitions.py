"""Coalition encoding, Shapley kernel weights and estimator configuration."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

# Exact paths enumerate 2**d coalitions; beyond this they are rejected.
ENUMERATION_CAP = 20


class EnumerationCapError(ValueError):
    pass


def check_enumerable(d: int) -> None:
    if d < 1:
        raise ValueError(f"feature count must be positive, got {d}")
    if d > ENUMERATION_CAP:
        raise EnumerationCapError(
            f"d={d} exceeds the enumeration cap of {ENUMERATION_CAP} features"
        )


def log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def shapley_kernel_weight(d: int, size: int) -> float:
    """Unnormalized Shapley kernel mass (d-1) / (C(d,k) k (d-k)) of one coalition.

    The binomial is taken in log space so large ``d`` does not overflow.
    Sizes 0 and ``d`` have infinite weight and raise ``ValueError``.
    """
    if d < 2:
        raise ValueError(f"kernel weight needs d >= 2, got {d}")
    if not 1 <= size <= d - 1:
        raise ValueError(f"kernel weight diverges for subset size {size} (d={d})")
    log_w = math.log(d - 1) - log_binom(d, size) - math.log(size) - math.log(d - size)
    return math.exp(log_w)


def size_masses(d: int) -> np.ndarray:
    """Total kernel mass per subset size k = 1..d-1, i.e. (d-1)/(k(d-k))."""
    k = np.arange(1, d, dtype=float)
    return (d - 1) / (k * (d - k))


def coalition_from_index(index: int, d: int) -> np.ndarray:
    check_enumerable(d)
    if not 0 <= index < (1 << d):
        raise ValueError(f"index {index} out of range for d={d}")
    return ((index >> np.arange(d)) & 1).astype(np.int8)


def coalition_to_index(z) -> int:
    z = np.asarray(z)
    return int(np.sum(z.astype(np.int64) << np.arange(z.shape[-1], dtype=np.int64)))


def coalition_indices(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.int64)
    return Z @ (np.int64(1) << np.arange(Z.shape[1], dtype=np.int64))


def all_coalitions(d: int) -> np.ndarray:
    """All 2**d coalitions as rows, row ``i`` being the binary expansion of ``i``."""
    check_enumerable(d)
    idx = np.arange(1 << d, dtype=np.int64)
    return ((idx[:, None] >> np.arange(d)) & 1).astype(np.int8)


def kernel_enumeration(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Every admissible coalition (0 < |z| < d) with its normalized sampling probability."""
    Z = all_coalitions(d)[1:-1]
    sizes = Z.sum(axis=1)
    w = np.array([shapley_kernel_weight(d, int(k)) for k in range(1, d)])[sizes - 1]
    return Z, w / w.sum()


@dataclass(frozen=True)
class GameBoundary:
    v_empty: float
    v_full: float

    @property
    def c(self) -> float:
        return self.v_full - self.v_empty


@dataclass(frozen=True)
class EstimatorConfig:
    """Hyperparameters shared by the iterative estimators.

    ``m=None`` means ten coalitions per feature. ``batch_size`` is the number of
    reference instances drawn per iteration by global games.
    """

    t: float = 0.5
    lam: float = 0.01
    m: int | None = None
    epsilon: float = 0.025
    xi: float = 0.3
    batch_size: int = 512
    max_iter: int = 10000
    seed: int = 0
    paired: bool = False
    bias_correction: bool = False
    negative_sampling_guard: bool = False

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ValueError(f"momentum t must lie in (0, 1), got {self.t}")
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        if not 0.0 < self.xi < 1.0:
            raise ValueError(f"xi must lie in (0, 1), got {self.xi}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.m is not None and self.m < 1:
            raise ValueError(f"m must be at least 1, got {self.m}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def batch_m(self, d: int) -> int:
        return 10 * d if self.m is None else self.m

    def replace(self, **changes) -> EstimatorConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# Fixed fan-out of a single root seed into independent streams.
SPLIT_STREAM = 1
SAMPLER_STREAM = 2
GLOBAL_BATCH_STREAM = 3


def derive_seed(seed: int, stream: int) -> int:
    return seed ^ stream
