"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 numerical
failure. ``CONGRUENCE_THREADS`` caps BLAS threads (0 or unset: library
default).
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from pathlib import Path

import numpy as np

from . import io, synthgen
from .calibration import DEFAULT_ALPHA, DEFAULT_LEVELS, calibration_report
from .cce import build_model_sample, cce_eval
from .experiments import EXPERIMENTS, run_experiment
from .kernels import FAMILIES, POLYNOMIAL, DegenerateOutputs, KernelSpec, output_bandwidth
from .mcmd import DEFAULT_LAMBDA, CholeskyFailure, MCMDConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "CONGRUENCE_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for data errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="congruence", description="Conditional congruence error and calibration metrics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic dataset and its model parameter tables")
    p.add_argument("name", choices=synthgen.GENERATORS)
    p.add_argument("--n", type=_positive_int, default=2000)
    p.add_argument("--m", type=_positive_int, default=500, help="comparison sample size (paired generators)")
    p.add_argument("--alpha", type=float, default=3.0, help="slope for marginal-flaw")
    p.add_argument("--epsilon", type=float, default=1e-3, help="NB over-dispersion for four-family")
    p.add_argument("--scenario", choices=synthgen.MCMD_SCENARIOS, default="same")
    p.add_argument("--noise", choices=synthgen.NOISE_MODELS, default="heteroscedastic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("cce", help="conditional congruence error of a model against ground truth")
    p.add_argument("ground_truth", type=Path, help="dataset NDJSON")
    p.add_argument("predictions", type=Path, nargs="?", help="prediction NDJSON")
    p.add_argument("--queries", type=Path, help="NDJSON of query inputs (default: ground-truth inputs)")
    p.add_argument("--downsample", type=_positive_int, metavar="K",
                   help="evaluate on K uniformly drawn ground-truth pairs")
    p.add_argument("--lam", type=_positive_float, default=DEFAULT_LAMBDA)
    p.add_argument("--lam-prime", type=_positive_float, default=None, help="defaults to --lam")
    p.add_argument("--ell", type=_positive_int, default=1, help="draws per prediction")
    p.add_argument("--kernel-x", choices=FAMILIES, default=POLYNOMIAL)
    p.add_argument("--gamma-x", type=_positive_float, default=0.5, help="RBF / Laplacian input bandwidth")
    p.add_argument("--degree", type=_positive_int, default=3)
    p.add_argument("--offset", type=float, default=1.0)
    p.add_argument("--scale", type=_positive_float, default=None, help="polynomial scale (default 1/d)")
    p.add_argument("--gamma-y", type=_positive_float, default=None,
                   help="output RBF bandwidth (default 1 / (2 var(y)))")
    p.add_argument("--self-check", action="store_true", help="use the ground truth as its own model sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("calibrate", help="PIT, ECE, reliability curve and NLL")
    p.add_argument("predictions", type=Path)
    p.add_argument("labels", type=Path, help="dataset NDJSON whose y values are the labels")
    p.add_argument("--q", type=_positive_int, default=DEFAULT_LEVELS)
    p.add_argument("--alpha", type=_positive_float, default=DEFAULT_ALPHA)
    p.add_argument("--out", type=Path, required=True, help="report JSON")
    p.add_argument("--curve", type=Path, help="reliability CSV (default: <out stem>_reliability.csv)")

    p = sub.add_parser("experiment", help="run a named desk-scale experiment")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    return parser


def _write_models(out: Path, data, models):
    for model in models:
        io.write_ndjson(out / f"model_{model.name}.ndjson", io.prediction_rows(data.xs, model.dists))


def cmd_synth(args) -> list:
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    name = args.name
    if name == "marginal-flaw":
        data, congruent, marginal = synthgen.gen_marginal_flaw(args.n, args.alpha, args.seed)
        io.write_ndjson(out / "dataset.ndjson", io.dataset_rows(data.xs, data.ys))
        _write_models(out, data, (congruent, marginal))
    elif name == "four-family":
        for family, (data, model) in synthgen.gen_four_family(args.n, args.epsilon, args.seed).items():
            io.write_ndjson(out / f"dataset_{family}.ndjson", io.dataset_rows(data.xs, data.ys))
            _write_models(out, data, (model,))
    elif name == "reject":
        data = synthgen.gen_reject_dgp(args.n, args.seed)
        io.write_ndjson(out / "dataset.ndjson", io.dataset_rows(data.xs, data.ys))
        _write_models(out, data, (synthgen.reject_model(data.xs), synthgen.reject_model(data.xs, False)))
    elif name in ("hyperparam-pair", "mcmd-study"):
        if name == "hyperparam-pair":
            s, sp = synthgen.gen_hyperparam_pair(args.n, args.m, args.seed)
        else:
            s, sp = synthgen.gen_mcmd_study(args.scenario, args.n, args.m, args.seed, args.noise)
        io.write_ndjson(out / "sample.ndjson", io.dataset_rows(s.conditioning, s.outputs))
        io.write_ndjson(out / "sample_prime.ndjson", io.dataset_rows(sp.conditioning, sp.outputs))
    elif name == "dispersion-profile":
        data, models = synthgen.gen_dispersion_profile(args.n, args.seed)
        io.write_ndjson(out / "dataset.ndjson", io.dataset_rows(data.xs, data.ys))
        _write_models(out, data, models.values())
    return sorted(p.name for p in out.iterdir())


def _kernel_x(args) -> KernelSpec:
    if args.kernel_x == POLYNOMIAL:
        return KernelSpec.polynomial(args.degree, args.offset, args.scale)
    return KernelSpec(args.kernel_x, gamma=args.gamma_x)


def cmd_cce(args) -> dict:
    gt = io.read_dataset(args.ground_truth)
    if args.self_check:
        xs, dists = None, None
    else:
        if args.predictions is None:
            raise UsageError("a predictions file is required unless --self-check is given")
        xs, dists = io.read_predictions(args.predictions)
        if xs.shape[1] != gt.dim:
            raise io.DataError(f"prediction inputs have dimension {xs.shape[1]}, ground truth {gt.dim}",
                               args.predictions)
    rng = np.random.default_rng(args.seed)
    if args.downsample is not None:
        n = len(gt)
        if args.downsample > n:
            raise io.DataError(f"cannot downsample {n} ground-truth pairs to {args.downsample}",
                               args.ground_truth)
        idx = np.sort(rng.choice(n, size=args.downsample, replace=False))
        gt = gt.take(idx)
        # predictions aligned row-for-row with the ground truth follow the same subsample
        if dists is not None and len(dists) == n:
            xs, dists = xs[idx], [dists[i] for i in idx]
    queries = io.read_queries(args.queries) if args.queries else gt.conditioning
    if queries.shape[1] != gt.dim:
        raise io.DataError(f"queries have dimension {queries.shape[1]}, ground truth {gt.dim}", args.queries)

    gamma_y = args.gamma_y if args.gamma_y else output_bandwidth(gt.outputs)
    lam_prime = args.lam_prime if args.lam_prime is not None else args.lam
    config = MCMDConfig(_kernel_x(args), KernelSpec.rbf(gamma_y), args.lam, lam_prime)
    model_sample = gt if args.self_check else build_model_sample(
        embeddings=xs, dists=dists, ell=args.ell, seed=rng)
    report = cce_eval(gt, model_sample, config, queries)
    return {
        "kind": "cce",
        "mean_cce": report.mean,
        "cce": report.values,
        "queries": report.queries,
        "n_ground_truth": len(gt),
        "n_model_sample": len(model_sample),
        "self_check": bool(args.self_check),
        "config": {"kernel_x": config.kernel_x.describe(), "kernel_y": config.kernel_y.describe(),
                   "lambda": config.lam, "lambda_prime": config.lam_prime, "ell": args.ell,
                   "seed": args.seed, "downsample": args.downsample},
    }


def cmd_calibrate(args) -> dict:
    xs, dists = io.read_predictions(args.predictions)
    labels = io.read_dataset(args.labels)
    if len(labels) != len(dists):
        raise io.DataError(f"{len(dists)} predictions but {len(labels)} labels", args.labels)
    report = calibration_report(dists, labels.outputs, args.q, args.alpha)
    curve = args.curve or args.out.with_name(args.out.stem + "_reliability.csv")
    io.write_csv(curve, ["level", "empirical"], zip(report.levels, report.empirical))
    return {
        "kind": "calibration",
        "ece": report.ece,
        "mean_nll": report.mean_nll,
        "alpha": report.alpha,
        "q": int(report.levels.size),
        "n": int(report.pit.size),
        "pit": report.pit,
        "levels": report.levels,
        "empirical": report.empirical,
        "weights": report.weights,
    }


def cmd_experiment(args) -> list:
    result = run_experiment(args.name, args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "summary.json", {"kind": "experiment", "experiment": result.name,
                                         "seed": result.seed, "summary": result.summary})
    for table, (header, rows) in sorted(result.tables.items()):
        io.write_csv(out / f"{table}.csv", header, rows)
    return sorted(p.name for p in out.iterdir())


@contextlib.contextmanager
def _thread_limit():
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        limit = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if limit < 0:
        raise UsageError(f"{THREADS_ENV} must be >= 0, got {limit}")
    if limit == 0:
        yield
        return
    from threadpoolctl import threadpool_limits
    with threadpool_limits(limits=limit):
        yield


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit():
            if args.command == "synth":
                cmd_synth(args)
            elif args.command == "experiment":
                cmd_experiment(args)
            elif args.command == "cce":
                io.write_json(args.out, cmd_cce(args))
            elif args.command == "calibrate":
                io.write_json(args.out, cmd_calibrate(args))
    except UsageError as exc:
        print(f"congruence: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CholeskyFailure, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"congruence: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (io.DataError, DegenerateOutputs, ValueError, OSError) as exc:
        print(f"congruence: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
