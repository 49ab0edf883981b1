"""Command-line entry point.

Subcommands: explain-local, explain-global, exact, bench, rate-study, plot-data.
Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from simshap.coalitions import (
    GLOBAL_BATCH_STREAM,
    SPLIT_STREAM,
    EstimatorConfig,
    derive_seed,
)
from simshap.estimators import (
    BatchMoments,
    ExplanationReport,
    NumericalFailure,
    SingularSystemError,
    enumeration_batches,
    exact_shapley,
    kernel_shap,
    sim_fixed_point,
    sim_shapley,
    stable_sim_shapley,
)
from simshap.games import GlobalGame, LocalGame
from simshap.imputation import MarginalImputer
from simshap.io import (
    InputError,
    dumps_report,
    ingest_csv,
    read_table_game,
    report_to_dict,
)
from simshap.metrics import fit_q_rate, l2_bias, pearson_consistency
from simshap.models import PredictiveModel, fit_linear, fit_logistic
from simshap.plotdata import emit_plot_data, to_csv
from simshap.sampling import make_rng

EXIT_INPUT = 2
EXIT_NUMERICAL = 3
ESTIMATORS = ("sim", "stable-sim", "kernelshap", "exact")
SPLIT_RATIOS = (0.7, 0.2, 0.1)
BACKGROUND_FRACTION = 0.05


@dataclass
class RunSpec:
    command: str
    data_path: str
    game_kind: str = "loss"
    loss: str | None = None
    model: str = "linear"
    model_path: str | None = None
    label_col: str | None = None
    target_class: int | None = None
    estimator: str = "sim"
    config: EstimatorConfig = field(default_factory=EstimatorConfig)
    background_size: int | None = None
    reference_size: int | None = None
    instance_index: int = 0
    output_path: str | None = None
    trace_path: str | None = None
    compare: str | None = None
    ridge: float = 1e-6
    l2: float = 1e-3
    budgets: tuple[int, ...] = ()
    reps: int = 100
    methods: tuple[str, ...] = ("sim", "kernelshap")
    truth_epsilon: float = 0.025
    lambdas: tuple[float, ...] = ()
    burn_in: int = 1


# --------------------------------------------------------------------------
# data preparation


@dataclass
class Splits:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    background: np.ndarray
    reference: np.ndarray


def make_splits(n: int, seed: int, background_size: int | None = None,
                reference_size: int | None = None) -> Splits:
    """Shuffle rows once and cut 70/20/10; background comes from train, reference from test."""
    if n < 3:
        raise InputError(f"need at least 3 rows to split, got {n}")
    perm = make_rng(derive_seed(seed, SPLIT_STREAM)).permutation(n)
    n_test = max(1, int(round(SPLIT_RATIOS[2] * n)))
    n_val = max(1, int(round(SPLIT_RATIOS[1] * n)))
    n_train = n - n_val - n_test
    if n_train < 1:
        raise InputError(f"dataset of {n} rows is too small to split")
    train, val, test = perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]
    bg = background_size or max(1, int(round(BACKGROUND_FRACTION * n)))
    if bg > n_train:
        raise InputError(f"background size {bg} exceeds training rows {n_train}")
    ref = reference_size or test.shape[0]
    if ref > test.shape[0]:
        raise InputError(f"reference size {ref} exceeds test rows {test.shape[0]}")
    return Splits(train, val, test, train[:bg], test[:ref])


def build_model(spec: RunSpec, X, y) -> PredictiveModel:
    if spec.model == "file":
        if not spec.model_path:
            raise InputError("--model file needs --model-path")
        with open(spec.model_path, encoding="utf-8") as fh:
            return PredictiveModel.from_json(fh.read())
    if y is None:
        raise InputError("fitting a model needs --label-col")
    if spec.model == "linear":
        return fit_linear(X, y, ridge=spec.ridge)
    if spec.model == "logistic":
        return fit_logistic(X, y, l2=spec.l2)
    raise InputError(f"unknown model {spec.model!r}")


def default_loss(spec: RunSpec, model: PredictiveModel) -> str:
    if spec.loss:
        return spec.loss
    return "ce" if model.kind == "logistic" else "mse"


def build_game(spec: RunSpec):
    """Return ``(game, feature_names)`` for a local or global explanation run."""
    if spec.game_kind == "table":
        if spec.command == "explain-global":
            raise InputError("a tabulated game has no reference set; use explain-local")
        game = read_table_game(spec.data_path)
        return game, [f"x{i}" for i in range(game.d)]
    data = ingest_csv(spec.data_path, spec.label_col)
    splits = make_splits(data.X.shape[0], spec.config.seed, spec.background_size,
                         spec.reference_size)
    y_train = None if data.y is None else data.y[splits.train]
    model = build_model(spec, data.X[splits.train], y_train)
    if model.d != data.X.shape[1]:
        raise InputError(f"model has {model.d} weights, data has {data.X.shape[1]} features")
    imputer = MarginalImputer(data.X[splits.background])
    loss = default_loss(spec, model)
    if spec.game_kind == "loss" and data.y is None:
        raise InputError("the loss game needs --label-col")

    def local(x, y):
        return LocalGame(model, imputer, x, y, kind=spec.game_kind, loss=loss,
                         target_class=spec.target_class)

    if spec.command == "explain-global":
        ref = splits.reference
        labels = None if data.y is None else data.y[ref]
        batch = min(spec.config.batch_size, ref.shape[0])
        game = GlobalGame(local, data.X[ref], labels, batch_size=batch,
                          seed=derive_seed(spec.config.seed, GLOBAL_BATCH_STREAM))
        return game, data.columns
    if not 0 <= spec.instance_index < splits.test.shape[0]:
        raise InputError(f"instance index {spec.instance_index} outside test split "
                         f"of {splits.test.shape[0]} rows")
    row = splits.test[spec.instance_index]
    return local(data.X[row], None if data.y is None else data.y[row]), data.columns


# --------------------------------------------------------------------------
# runs


def estimate(game, estimator: str, config: EstimatorConfig):
    if estimator == "sim":
        return sim_shapley(game, config)
    if estimator == "stable-sim":
        return stable_sim_shapley(game, config)
    if estimator == "kernelshap":
        return kernel_shap(game, config, restarts=True)
    if estimator == "exact":
        phi = exact_shapley(game)
        return ExplanationReport(beta=phi, estimator="exact", boundary=game.boundary,
                                 iterations=1, evaluations=1 << game.d, converged=True,
                                 beta_range=float(phi.max() - phi.min()))
    raise InputError(f"unknown estimator {estimator!r}")


def run_explain(spec: RunSpec) -> dict:
    game, columns = build_game(spec)
    estimator = "exact" if spec.command == "exact" else spec.estimator
    report = estimate(game, estimator, spec.config)
    extra = {"command": spec.command}
    if spec.compare:
        ref = estimate(game, spec.compare, spec.config.replace(epsilon=spec.truth_epsilon))
        comparison = {"reference_estimator": spec.compare,
                      "bias": l2_bias(report.beta, ref.beta)}
        try:
            comparison["consistency"] = pearson_consistency(report.beta, ref.beta)
        except ValueError:
            comparison["consistency"] = None
        extra["comparison"] = comparison
    doc = report_to_dict(report, columns, extra)
    if spec.output_path:
        with open(spec.output_path, "w", encoding="utf-8") as fh:
            fh.write(dumps_report(doc))
    if spec.trace_path and report.trace is not None:
        with open(spec.trace_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.trace.to_csv())
    return doc


BENCH_COLUMNS = ("method", "budget", "reps", "mean_bias", "sd_bias", "mean_millis",
                 "mean_evaluations")


def run_bench(spec: RunSpec) -> str:
    """Mean bias and time per (method, budget) at fixed coalition budgets."""
    if not spec.budgets:
        raise InputError("bench needs --budget-grid")
    if "exact" in spec.methods:
        raise InputError("exact has no sampling budget and cannot be benchmarked")
    if spec.reps < 1:
        raise InputError("--reps must be positive")
    game, _ = build_game(spec)
    if spec.game_kind == "table":
        truth = exact_shapley(game)
    else:
        truth = kernel_shap(game, spec.config.replace(epsilon=spec.truth_epsilon),
                            restarts=True).beta
    m = spec.config.batch_m(game.d)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(BENCH_COLUMNS)
    for method in spec.methods:
        if method not in ESTIMATORS:
            raise InputError(f"unknown method {method!r}")
        for budget in spec.budgets:
            if budget < 1 or (method != "kernelshap" and budget < m):
                raise InputError(f"budget {budget} is smaller than one batch of {m}")
            biases, millis, evals = [], [], []
            for r in range(spec.reps):
                seed = (spec.config.seed + r) % 2**64
                if method == "kernelshap":
                    cfg = spec.config.replace(seed=seed, m=budget)
                    rep = kernel_shap(game, cfg)
                else:
                    # fixed budget: no early stopping
                    cfg = spec.config.replace(seed=seed, max_iter=budget // m, epsilon=1e-300)
                    rep = estimate(game, method, cfg)
                biases.append(l2_bias(rep.beta, truth))
                millis.append(rep.millis)
                evals.append(rep.evaluations)
            sd = float(np.std(biases, ddof=1)) if len(biases) > 1 else 0.0
            writer.writerow([method, budget, spec.reps, repr(float(np.mean(biases))), repr(sd),
                             repr(float(np.mean(millis))), repr(float(np.mean(evals)))])
    text = out.getvalue()
    if spec.output_path:
        with open(spec.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def run_rate_study(spec: RunSpec) -> dict:
    """Deterministic full-enumeration SIM runs: fitted vs predicted contraction per lambda."""
    game, _ = build_game(spec)
    truth = exact_shapley(game)
    lambdas = spec.lambdas or (spec.config.lam,)
    studies = []
    trace_rows = []
    Z, w = next(enumeration_batches(game.d))
    values = game.evaluate_batch(Z)
    for lam in lambdas:
        cfg = spec.config.replace(lam=lam, epsilon=1e-300)
        rep = sim_shapley(game, cfg, batches=enumeration_batches(game.d))
        moments = BatchMoments.from_batch(Z, values, game.boundary.v_empty, lam, weights=w)
        fixed = sim_fixed_point(moments, cfg.t, game.boundary.c)
        entry = {"lambda": lam, "t": cfg.t, "iterations": rep.iterations,
                 "fixed_point_bias": l2_bias(fixed, truth),
                 "final_bias": l2_bias(rep.beta, truth)}
        try:
            fit = fit_q_rate(rep.trace, fixed, burn_in=spec.burn_in, A=moments.A, t=cfg.t, lam=lam)
            entry.update(fit.to_dict())
            entry["window"] = list(fit.window)
        except ValueError as exc:
            entry.update(fitted_rho=None, theoretical_rho=None, fit_error=str(exc))
        studies.append(entry)
        for n, beta in zip(rep.trace.n, rep.trace.beta):
            trace_rows.append((f"lambda={lam!r}", n, float(np.linalg.norm(beta - fixed))))
    doc = {"schemaVersion": 1, "command": "rate-study", "exact": truth.tolist(),
           "studies": studies}
    if spec.output_path:
        with open(spec.output_path, "w", encoding="utf-8") as fh:
            fh.write(dumps_report(doc))
    if spec.trace_path:
        with open(spec.trace_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(to_csv(trace_rows))
    return doc


# --------------------------------------------------------------------------
# argument parsing


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV dataset, or table file with --game table")
    p.add_argument("--label-col")
    p.add_argument("--game", choices=("loss", "prediction", "table"), default="loss")
    p.add_argument("--loss", choices=("mse", "ce"))
    p.add_argument("--model", choices=("linear", "logistic", "file"), default="linear")
    p.add_argument("--model-path")
    p.add_argument("--target-class", type=int, choices=(0, 1))
    p.add_argument("--estimator", choices=ESTIMATORS, default="sim")
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p.add_argument("--m", type=int, help="coalitions per iteration (default 10 * d)")
    p.add_argument("--epsilon", type=float, default=0.025)
    p.add_argument("--xi", type=float, default=0.3)
    p.add_argument("--T", dest="max_iter", type=int, default=10000)
    p.add_argument("--batch-B", dest="batch_size", type=int, default=512)
    p.add_argument("--paired", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--trace")
    p.add_argument("--reference-size", type=int)
    p.add_argument("--background-size", type=int)
    p.add_argument("--instance-index", type=int, default=0)
    p.add_argument("--compare", choices=("exact", "kernelshap"))
    p.add_argument("--ridge", type=float, default=1e-6)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--truth-epsilon", type=float, default=0.025)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simshap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("explain-local", "explain-global", "exact"):
        _add_run_args(sub.add_parser(name))
    bench = sub.add_parser("bench")
    _add_run_args(bench)
    bench.add_argument("--budget-grid", type=_ints, required=True)
    bench.add_argument("--reps", type=int, default=100)
    bench.add_argument("--methods", default="sim,kernelshap")
    rate = sub.add_parser("rate-study")
    _add_run_args(rate)
    rate.add_argument("--lambda-grid", type=_floats)
    rate.add_argument("--burn-in", type=int, default=1)
    plot = sub.add_parser("plot-data")
    plot.add_argument("input")
    plot.add_argument("--out")
    plot.add_argument("--series")
    plot.add_argument("--reference", help="JSON report whose attributions serve as reference")
    return parser


def spec_from_args(args) -> RunSpec:
    config = EstimatorConfig(
        t=args.t, lam=args.lam, m=args.m, epsilon=args.epsilon, xi=args.xi,
        batch_size=args.batch_size, max_iter=args.max_iter, seed=args.seed, paired=args.paired,
    )
    spec = RunSpec(
        command=args.command, data_path=args.data, game_kind=args.game, loss=args.loss,
        model=args.model, model_path=args.model_path, label_col=args.label_col,
        target_class=args.target_class, estimator=args.estimator, config=config,
        background_size=args.background_size, reference_size=args.reference_size,
        instance_index=args.instance_index, output_path=args.out, trace_path=args.trace,
        compare=args.compare, ridge=args.ridge, l2=args.l2, truth_epsilon=args.truth_epsilon,
    )
    if args.command == "bench":
        spec.budgets = args.budget_grid
        spec.reps = args.reps
        spec.methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    if args.command == "rate-study":
        spec.lambdas = args.lambda_grid or ()
        spec.burn_in = args.burn_in
    return spec


def run_plot_data(args) -> str:
    reference = None
    if args.reference:
        with open(args.reference, encoding="utf-8") as fh:
            doc = json.load(fh)
        reference = np.array([a["value"] for a in doc["attributions"]])
    text = emit_plot_data(args.input, series=args.series, reference=reference)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plot-data":
            text = run_plot_data(args)
            if not args.out:
                sys.stdout.write(text)
            return 0
        spec = spec_from_args(args)
        if args.command == "bench":
            text = run_bench(spec)
            if not spec.output_path:
                sys.stdout.write(text)
        elif args.command == "rate-study":
            doc = run_rate_study(spec)
            if not spec.output_path:
                sys.stdout.write(dumps_report(doc))
        else:
            doc = run_explain(spec)
            if not spec.output_path:
                sys.stdout.write(dumps_report(doc))
    except (SingularSystemError, NumericalFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InputError, ValueError, OSError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
