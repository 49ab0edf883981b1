"""Shapley value estimators: exact enumeration, KernelSHAP, SIM-Shapley.

All regression-based estimators share one primitive: the minimizer of a ridge
quadratic ``b'Ab/2 - q'b`` subject to ``1'b = c``, computed from a Cholesky
factorization of ``A + lam I``.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
import scipy.linalg

from simshap.coalitions import (
    SAMPLER_STREAM,
    EstimatorConfig,
    GameBoundary,
    all_coalitions,
    check_enumerable,
    derive_seed,
    kernel_enumeration,
)
from simshap.online import WelfordAccumulator
from simshap.sampling import KernelSampler

# Smallest/largest squared Cholesky pivot ratio below which a system is singular.
SINGULAR_RCOND = 1e-14
KERNELSHAP_JITTER = 1e-10
# Iterates the running variance must hold before the negative-sampling guard acts.
GUARD_WARMUP = 2


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NumericalFailure(FloatingPointError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# --------------------------------------------------------------------------
# exact oracle


def exact_shapley(game) -> np.ndarray:
    """Shapley values by enumerating all 2**d coalitions once."""
    d = game.d
    check_enumerable(d)
    v = np.asarray(game.evaluate_batch(all_coalitions(d)), dtype=float)
    v[0], v[-1] = game.boundary.v_empty, game.boundary.v_full
    idx = np.arange(1 << d, dtype=np.int64)
    sizes = np.zeros(1 << d, dtype=np.int64)
    for i in range(d):
        sizes += (idx >> i) & 1
    # weight of a coalition S not containing i: |S|! (d-|S|-1)! / d!
    s = np.arange(d)
    w = np.exp(
        np.array([math.lgamma(k + 1) + math.lgamma(d - k) - math.lgamma(d + 1) for k in s])
    )
    phi = np.empty(d)
    for i in range(d):
        without = idx[((idx >> i) & 1) == 0]
        phi[i] = np.sum(w[sizes[without]] * (v[without | (1 << i)] - v[without]))
    return phi


# --------------------------------------------------------------------------
# batch moments and the constrained solve


@dataclass
class BatchMoments:
    A: np.ndarray
    bbar: np.ndarray
    lam: float = 0.0

    @property
    def Abar(self) -> np.ndarray:
        return self.A + self.lam * np.eye(self.A.shape[0])

    @classmethod
    def from_batch(cls, Z, values, v_empty: float, lam: float = 0.0, weights=None) -> BatchMoments:
        """Moments of a coalition batch; ``weights`` are relative and default to equal."""
        Z = np.asarray(Z, dtype=float)
        y = np.asarray(values, dtype=float) - v_empty
        if weights is None:
            weights = np.full(Z.shape[0], 1.0 / Z.shape[0])
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        A = (Z * weights[:, None]).T @ Z
        bbar = Z.T @ (weights * y)
        return cls(A, bbar, lam)


class ConstrainedSolver:
    """Cholesky factorization of ``A + lam I`` reused across right-hand sides."""

    def __init__(self, Abar: np.ndarray):
        self.d = Abar.shape[0]
        try:
            self.cho = scipy.linalg.cho_factor(Abar, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(
                "regularized moment matrix is not positive definite",
                {"min_eig": float(np.linalg.eigvalsh(Abar)[0])},
            ) from exc
        pivots = np.diag(self.cho[0]) ** 2
        if pivots.min() <= SINGULAR_RCOND * pivots.max():
            raise SingularSystemError(
                "regularized moment matrix is numerically singular",
                {"pivot_ratio": float(pivots.min() / pivots.max())},
            )
        self.inv_ones = scipy.linalg.cho_solve(self.cho, np.ones(self.d))
        self.ones_inv_ones = float(self.inv_ones.sum())

    def solve(self, q, c: float) -> np.ndarray:
        x = scipy.linalg.cho_solve(self.cho, np.asarray(q, dtype=float))
        return x + self.inv_ones * ((c - x.sum()) / self.ones_inv_ones)


def solve_constrained_ridge(moments: BatchMoments, target, c: float) -> np.ndarray:
    """``Abar^{-1} [q + 1 (c - 1'Abar^{-1} q) / (1'Abar^{-1} 1)]`` for ``q = target``."""
    return ConstrainedSolver(moments.Abar).solve(target, c)


# --------------------------------------------------------------------------
# reports and traces


TRACE_COLUMNS = ("n", "max_sigma", "range", "r", "flagged", "evals", "millis")


@dataclass
class IterationTrace:
    d: int
    n: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    max_sigma: list = field(default_factory=list)
    beta_range: list = field(default_factory=list)
    r: list = field(default_factory=list)
    flagged: list = field(default_factory=list)
    evals: list = field(default_factory=list)
    millis: list = field(default_factory=list)

    def record(self, n, beta, delta, max_sigma, beta_range, r, flagged, evals, millis):
        if self.n and n <= self.n[-1]:
            raise ValueError("trace records must be strictly increasing in n")
        self.n.append(n)
        self.beta.append(np.array(beta, dtype=float))
        self.delta.append(None if delta is None else np.array(delta, dtype=float))
        self.max_sigma.append(max_sigma)
        self.beta_range.append(beta_range)
        self.r.append(r)
        self.flagged.append(bool(flagged))
        self.evals.append(int(evals))
        self.millis.append(millis)

    def __len__(self) -> int:
        return len(self.n)

    def betas(self) -> np.ndarray:
        return np.array(self.beta).reshape(len(self), self.d)

    def to_csv(self, include_timing: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        header = ["n"] + [f"beta_{i}" for i in range(self.d)]
        header += ["max_sigma", "range", "r", "flagged", "evals"]
        if include_timing:
            header.append("millis")
        writer.writerow(header)
        for k in range(len(self)):
            row = [self.n[k], *(repr(float(b)) for b in self.beta[k])]
            row += [_fmt(self.max_sigma[k]), _fmt(self.beta_range[k]), _fmt(self.r[k]),
                    int(self.flagged[k]), self.evals[k]]
            if include_timing:
                row.append(_fmt(self.millis[k]))
            writer.writerow(row)
        return buf.getvalue()


def _fmt(x) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


@dataclass
class ExplanationReport:
    beta: np.ndarray
    estimator: str
    boundary: GameBoundary
    config: EstimatorConfig | None = None
    iterations: int = 0
    evaluations: int = 0
    converged: bool = False
    max_sigma: float = float("nan")
    beta_range: float = float("nan")
    millis: float = 0.0
    trace: IterationTrace | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def efficiency_gap(self) -> float:
        return float(abs(self.beta.sum() - self.boundary.c))


# --------------------------------------------------------------------------
# stopping rule


def range_scale(beta: np.ndarray, c: float) -> float:
    spread = float(beta.max() - beta.min())
    if spread < 1e-12:
        return max(1e-12, abs(c) / beta.shape[0])
    return spread


def has_converged(acc: WelfordAccumulator, beta: np.ndarray, c: float, epsilon: float) -> tuple[bool, float]:
    """Stop once the largest standard error falls below ``epsilon`` times the spread of beta."""
    if acc.count < 3:
        return False, float("nan")
    max_sigma = float(acc.standard_error().max())
    return max_sigma < epsilon * range_scale(beta, c), max_sigma


# --------------------------------------------------------------------------
# batch sources


def _as_batch(item):
    if isinstance(item, tuple):
        return np.asarray(item[0]), (None if item[1] is None else np.asarray(item[1], dtype=float))
    return np.asarray(item), None


def _sampled_batches(d: int, config: EstimatorConfig) -> Iterator:
    sampler = KernelSampler(d, seed=derive_seed(config.seed, SAMPLER_STREAM), paired=config.paired)
    m = config.batch_m(d)
    while True:
        yield sampler.sample(m), None


def enumeration_batches(d: int) -> Iterator:
    """Deterministic batches: every admissible coalition, weighted by its kernel probability."""
    Z, w = kernel_enumeration(d)
    while True:
        yield Z, w


def _check_finite(beta, n, what):
    if not np.all(np.isfinite(beta)):
        raise NumericalFailure(f"non-finite {what} at iteration {n}", {"iteration": n})


def _project(beta: np.ndarray, c: float) -> np.ndarray:
    # Removes floating-point drift from the efficiency constraint.
    return beta + (c - beta.sum()) / beta.shape[0]


# --------------------------------------------------------------------------
# KernelSHAP


def kernel_shap(game, config: EstimatorConfig | None = None, batches: Iterable | None = None,
                restarts: bool = False) -> ExplanationReport:
    """Constrained least squares on a coalition sample (KernelSHAP).

    Without ``restarts`` one batch is drawn and solved. With ``restarts`` fresh
    batches are appended to a cumulative sample and the problem re-solved after
    each one, until the spread-relative standard error of the successive
    solutions falls below ``epsilon`` or ``max_iter`` batches are used.
    """
    config = config or EstimatorConfig()
    d = game.d
    if d < 2:
        raise ValueError("KernelSHAP needs at least two features")
    start = time.perf_counter()
    bnd = game.boundary
    c = bnd.c
    source = iter(batches) if batches is not None else _sampled_batches(d, config)
    trace = IterationTrace(d)
    acc = WelfordAccumulator(d)
    A_sum = np.zeros((d, d))
    b_sum = np.zeros(d)
    w_total = 0.0
    evals = 2
    diagnostics: dict = {"jitter_fallbacks": 0}
    converged = False
    max_sigma = float("nan")
    beta = np.zeros(d)
    n = 0
    limit = config.max_iter if restarts else 1
    while n < limit:
        n += 1
        game.begin_iteration()
        Z, w = _as_batch(next(source))
        vals = game.evaluate_batch(Z)
        evals += Z.shape[0]
        if w is None:
            w = np.ones(Z.shape[0])
        mom = BatchMoments.from_batch(Z, vals, bnd.v_empty, 0.0, weights=w)
        A_sum += float(w.sum()) * mom.A
        b_sum += float(w.sum()) * mom.bbar
        w_total += float(w.sum())
        moments = BatchMoments(A_sum / w_total, b_sum / w_total, 0.0)
        try:
            solver = ConstrainedSolver(moments.Abar)
        except SingularSystemError as exc:
            diagnostics["jitter_fallbacks"] += 1
            diagnostics["singular"] = exc.diagnostics
            moments = BatchMoments(moments.A, moments.bbar, KERNELSHAP_JITTER)
            try:
                solver = ConstrainedSolver(moments.Abar)
            except SingularSystemError as exc2:
                exc2.diagnostics.update(batch_rank=int(np.linalg.matrix_rank(moments.A)),
                                        iteration=n, samples=int(w_total))
                raise
        beta = _project(solver.solve(moments.bbar, c), c)
        _check_finite(beta, n, "KernelSHAP solution")
        acc.update(beta)
        converged, max_sigma = has_converged(acc, beta, c, config.epsilon)
        trace.record(n, beta, None, max_sigma, float(beta.max() - beta.min()), None, False,
                     evals, (time.perf_counter() - start) * 1e3)
        if converged:
            break
    return ExplanationReport(
        beta=beta, estimator="kernelshap", boundary=bnd, config=config, iterations=n,
        evaluations=evals, converged=converged, max_sigma=max_sigma,
        beta_range=float(beta.max() - beta.min()), millis=(time.perf_counter() - start) * 1e3,
        trace=trace, diagnostics=diagnostics,
    )


def kernel_shap_enumerated(game) -> np.ndarray:
    """KernelSHAP with the full kernel-weighted enumeration standing in for the sample."""
    return kernel_shap(game, EstimatorConfig(), batches=enumeration_batches(game.d)).beta


# --------------------------------------------------------------------------
# SIM-Shapley


def contribution_covariance(Z, values, v_empty: float, beta: np.ndarray, weights=None) -> np.ndarray:
    """Covariance of the per-coalition terms ``z (v(z) - v(0) - z'beta)`` within one batch."""
    Z = np.asarray(Z, dtype=float)
    g = Z * (np.asarray(values, dtype=float) - v_empty - Z @ beta)[:, None]
    if weights is None:
        return np.cov(g, rowvar=False, ddof=1) if g.shape[0] > 1 else np.zeros((Z.shape[1],) * 2)
    w = np.asarray(weights, dtype=float) / np.sum(weights)
    centered = g - w @ g
    return (centered * w[:, None]).T @ centered


def step_variance(solver: ConstrainedSolver, cov: np.ndarray, m_eff: float) -> np.ndarray:
    """Diagonal of ``K cov K / m_eff`` where ``K`` maps a right-hand side to the constrained step.

    ``K = Abar^{-1} - Abar^{-1} 1 1' Abar^{-1} / (1' Abar^{-1} 1)`` is the
    sensitivity of the constrained solve to its right-hand side, so this is the
    delta-method variance of the step taken from one batch.
    """
    d = solver.d
    inv = scipy.linalg.cho_solve(solver.cho, np.eye(d))
    K = inv - np.outer(solver.inv_ones, solver.inv_ones) / solver.ones_inv_ones
    return np.einsum("ij,jk,ik->i", K, cov, K) / m_eff


def sim_shapley(game, config: EstimatorConfig | None = None, batches: Iterable | None = None,
                name: str = "sim") -> ExplanationReport:
    """Stochastic iteration with momentum.

    Each iteration draws a coalition batch, solves the regularized constrained
    problem in closed form for the momentum term ``delta`` and blends it into
    the running estimate ``beta <- c1 beta + c2 delta`` with ``c1 = t`` and
    ``c2 = 1 - t``, or with both divided by ``1 - t**n`` under bias correction.
    Every iterate satisfies ``sum(beta) = v(1) - v(0)``.

    With ``negative_sampling_guard`` a batch whose implied update variance
    exceeds the running variance of the iterates by a relative margin above
    ``xi`` is discarded and the previous iterate kept.
    """
    config = config or EstimatorConfig()
    if config.lam <= 0:
        raise ValueError("SIM-Shapley needs lam > 0 for an invertible regularized system")
    d = game.d
    if d < 2:
        raise ValueError("SIM-Shapley needs at least two features")
    start = time.perf_counter()
    t = config.t
    bnd = game.boundary
    c = bnd.c
    source = iter(batches) if batches is not None else _sampled_batches(d, config)
    trace = IterationTrace(d)
    acc = WelfordAccumulator(d)
    beta = np.zeros(d)
    delta = np.zeros(d)
    evals = 2
    flagged_total = 0
    accepted = 0
    cov_sum = np.zeros((d, d))
    cov_batches = 0
    A_mean = np.zeros((d, d))
    converged = False
    max_sigma = float("nan")
    n = 0
    while n < config.max_iter:
        n += 1
        game.begin_iteration()
        Z, w = _as_batch(next(source))
        vals = np.asarray(game.evaluate_batch(Z), dtype=float)
        evals += Z.shape[0]
        if not np.all(np.isfinite(vals)):
            raise NumericalFailure(f"non-finite game value at iteration {n}", {"iteration": n})
        moments = BatchMoments.from_batch(Z, vals, bnd.v_empty, config.lam, weights=w)
        A_mean += (moments.A - A_mean) / n
        try:
            solver = ConstrainedSolver(moments.Abar)
        except SingularSystemError as exc:
            exc.diagnostics.update(iteration=n)
            raise
        if config.bias_correction:
            # the k-th accepted update divides by 1 - t**k, so the first gives beta = delta
            corr = 1.0 - t ** (accepted + 1)
            c1, c2 = t / corr, (1.0 - t) / corr
        else:
            c1, c2 = t, 1.0 - t
        q = moments.bbar - c1 * (moments.A @ beta)
        step = solver.solve(q, c - c1 * beta.sum())
        new_delta = step / c2
        new_beta = _project(c1 * beta + step, c)
        _check_finite(new_beta, n, "iterate")

        r = None
        flagged = False
        if config.negative_sampling_guard:
            # Dispersion is pooled over batches: a batch of near-duplicate
            # coalitions has little internal spread but a badly conditioned solve.
            # Residuals around the zero initial iterate say nothing about the
            # update noise, so pooling starts after the first accepted update.
            if accepted:
                cov_sum += contribution_covariance(Z, vals, bnd.v_empty, beta, w)
                cov_batches += 1
            if cov_batches and acc.count >= GUARD_WARMUP:
                var_beta = np.linalg.norm(acc.variance)
                if var_beta > 0:
                    m_eff = Z.shape[0] if w is None else 1.0 / np.sum((w / w.sum()) ** 2)
                    var_step = step_variance(solver, cov_sum / cov_batches, m_eff)
                    r = float((np.linalg.norm(var_step) - var_beta) / var_beta)
                    flagged = r > config.xi

        # The running variance absorbs every computed iterate, including one
        # that the guard then rolls back.
        acc.update(new_beta)
        converged, max_sigma = has_converged(acc, new_beta, c, config.epsilon)
        if flagged and not converged:
            flagged_total += 1
            trace.record(n, beta, delta, max_sigma, float(beta.max() - beta.min()), r, True,
                         evals, (time.perf_counter() - start) * 1e3)
            continue
        beta, delta = new_beta, new_delta
        accepted += 1
        trace.record(n, beta, delta, max_sigma, float(beta.max() - beta.min()), r, False,
                     evals, (time.perf_counter() - start) * 1e3)
        if converged:
            break
    return ExplanationReport(
        beta=beta, estimator=name, boundary=bnd, config=config, iterations=n,
        evaluations=evals, converged=converged, max_sigma=max_sigma,
        beta_range=float(beta.max() - beta.min()), millis=(time.perf_counter() - start) * 1e3,
        trace=trace, diagnostics={"rejected_batches": flagged_total, "accepted_updates": accepted,
                     "mean_A": A_mean},
    )


def stable_sim_shapley(game, config: EstimatorConfig | None = None,
                       batches: Iterable | None = None) -> ExplanationReport:
    """SIM-Shapley with initialization-bias correction and the negative-sampling guard."""
    config = (config or EstimatorConfig()).replace(bias_correction=True,
                                                   negative_sampling_guard=True)
    return sim_shapley(game, config, batches=batches, name="stable-sim")


def sim_fixed_point(moments: BatchMoments, t: float, c: float) -> np.ndarray:
    """Fixed point of the deterministic SIM map for a fixed batch.

    Setting ``beta = delta`` in the update makes it a constrained ridge problem
    with matrix ``A + (1 - t) lam I``.
    """
    fixed = BatchMoments(moments.A, moments.bbar, (1.0 - t) * moments.lam)
    return ConstrainedSolver(fixed.Abar).solve(fixed.bbar, c)
