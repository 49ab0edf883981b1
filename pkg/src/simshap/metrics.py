"""Accuracy, agreement and convergence-rate diagnostics."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg


def l2_bias(estimate, reference) -> float:
    a = np.asarray(estimate, dtype=float)
    b = np.asarray(reference, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def pearson_consistency(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] < 2:
        raise ValueError("correlation needs at least two entries")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise ValueError("correlation is undefined for a constant vector")
    a = a - a.mean()
    b = b - b.mean()
    return float(np.clip(a @ b / np.sqrt((a @ a) * (b @ b)), -1.0, 1.0))


def constraint_orthogonal_alpha(A) -> float:
    """Smallest eigenvalue of ``A`` restricted to the subspace orthogonal to all-ones."""
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    Q = scipy.linalg.null_space(np.ones((1, d)))
    return float(np.linalg.eigvalsh(Q.T @ A @ Q)[0])


def theoretical_rate(t: float, lam: float, alpha: float) -> float:
    return t * lam / (alpha + lam)


@dataclass
class ConvergenceRateReport:
    fitted_rho: float
    theoretical_rho: float | None
    alpha: float | None
    r2: float
    window: tuple[int, int]
    truncated: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def fit_q_rate(trace, reference, burn_in: int = 10, A=None, t: float | None = None,
               lam: float | None = None, floor: float = 1e-12) -> ConvergenceRateReport:
    """Log-linear fit of ``||beta_n - reference||`` against ``n`` after ``burn_in``.

    ``trace`` is an ``IterationTrace`` or a plain sequence of error norms
    indexed from ``n = 1``. Errors below ``floor`` (relative to the reference
    scale) end the window early, which is reported as ``truncated``. With ``A``,
    ``t`` and ``lam`` the predicted rate ``t lam / (alpha + lam)`` is attached.
    """
    if hasattr(trace, "betas"):
        ns = np.asarray(trace.n)
        errors = np.linalg.norm(trace.betas() - np.asarray(reference, dtype=float), axis=1)
    else:
        errors = np.asarray(trace, dtype=float)
        ns = np.arange(1, errors.shape[0] + 1)
    keep = ns > burn_in
    ns, errors = ns[keep], errors[keep]
    scale = max(1.0, float(np.linalg.norm(reference)))
    tiny = np.nonzero(errors <= floor * scale)[0]
    truncated = tiny.size > 0
    if truncated:
        ns, errors = ns[: tiny[0]], errors[: tiny[0]]
    if ns.shape[0] < 3:
        raise ValueError(
            f"only {ns.shape[0]} usable error values after burn-in {burn_in}; need at least 3"
        )
    logs = np.log(errors)
    slope, intercept = np.polyfit(ns, logs, 1)
    resid = logs - (slope * ns + intercept)
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    alpha = rho = None
    if A is not None and t is not None and lam is not None:
        alpha = constraint_orthogonal_alpha(A)
        rho = theoretical_rate(t, lam, alpha)
    return ConvergenceRateReport(float(np.exp(slope)), rho, alpha, r2,
                                 (int(ns[0]), int(ns[-1])), truncated)
