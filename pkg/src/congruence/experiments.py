"""Seeded desk-scale experiments.

Each runner takes a seed and returns an :class:`ExperimentResult`: a flat
JSON-ready summary plus named CSV tables of curve data. Runners are pure
functions of their arguments, so re-running with the same seed reproduces
every number bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .calibration import calibration_report
from .distributions import nll
from .cce import build_model_sample, cce_eval, point_predictions, reject_sweep
from .kernels import KernelSpec, output_bandwidth
from .mcmd import MCMDConfig, ConditionalEmbedding, SampleSet, mcmd_profile
from . import synthgen

# input kernel for one-dimensional synthetic inputs with the identity embedding
ONE_D_KERNEL = KernelSpec.rbf(0.5)
# input kernel used for the MCMD behaviour study
STUDY_KERNEL = KernelSpec.rbf(1.0)
GRID_SIZE = 100
LAMBDA_GRID = (0.001, 0.01, 0.05, 0.1, 0.5, 1.0)
GAMMA_GRID = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
ELL_GRID = (1, 2, 3, 4, 5)
FRACTIONS = (0.25, 0.5, 0.75, 1.0)

Table = Tuple[List[str], List[list]]
_STREAM_TAG = 0x435645


@dataclass
class ExperimentResult:
    name: str
    seed: int
    summary: dict
    tables: Dict[str, Table] = field(default_factory=dict)


def _child(seed: int, keys) -> np.random.SeedSequence:
    if not keys:
        raise ValueError("child streams need at least one key")
    # spawn keys are mixed separately from the entropy, so (0, 0) never
    # collapses onto the root stream the way trailing zero entropy words do;
    # the tag keeps these apart from SeedSequence.spawn() children
    return np.random.SeedSequence(seed, spawn_key=(_STREAM_TAG, *(int(k) for k in keys)))


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for a (seed, purpose) pair."""
    return np.random.default_rng(_child(seed, keys))


def child_seed(seed: int, *keys: int) -> int:
    return int(_child(seed, keys).generate_state(1)[0])


def input_grid(lo: float = 0.0, hi: float = synthgen.TWO_PI, size: int = GRID_SIZE) -> np.ndarray:
    return np.linspace(lo, hi, size)[:, None]


def _config(ground_truth: SampleSet, kernel_x: KernelSpec, lam: float = 0.1) -> MCMDConfig:
    return MCMDConfig(kernel_x, KernelSpec.rbf(output_bandwidth(ground_truth.outputs)), lam, lam)


def _model_cce(gt_embedding: ConditionalEmbedding, data, model, config, rng, ell=1, queries=None):
    sample = build_model_sample(embeddings=data.xs, dists=model.dists, ell=ell, seed=rng)
    return cce_eval(gt_embedding, sample, config, queries)


def _curve_rows(report) -> List[list]:
    return [[float(lv), float(em)] for lv, em in zip(report.levels, report.empirical)]


def _sorted_profile(xs, columns: Dict[str, np.ndarray]) -> Table:
    order = np.argsort(xs[:, 0], kind="stable")
    header = ["x"] + list(columns)
    rows = [[float(xs[i, 0])] + [float(columns[c][i]) for c in columns] for i in order]
    return header, rows


def fig1_marginal(seed: int = 0, n: int = 2000, alpha: float = 3.0) -> ExperimentResult:
    """A marginal model looks calibrated under ECE but is far from congruent."""
    data, congruent, marginal = synthgen.gen_marginal_flaw(n, alpha, seed)
    gt = data.sample_set
    config = _config(gt, KernelSpec.polynomial())
    emb = ConditionalEmbedding.fit(gt, config.kernel_x, config.lam)
    summary, columns, tables = {"n": n, "alpha": alpha}, {}, {}
    for key, model in ((1, congruent), (2, marginal)):
        rep = _model_cce(emb, data, model, config, child_rng(seed, key))
        cal = calibration_report(model.dists, data.ys)
        summary[f"mean_cce_{model.name}"] = rep.mean
        summary[f"ece_{model.name}"] = cal.ece
        summary[f"nll_{model.name}"] = cal.mean_nll
        columns[f"cce_{model.name}"] = rep.values
        tables[f"reliability_{model.name}"] = (["level", "empirical"], _curve_rows(cal))
    summary["cce_ratio"] = summary["mean_cce_marginal"] / summary["mean_cce_congruent"]
    tables["profile"] = _sorted_profile(data.xs, columns)
    return ExperimentResult("fig1-marginal", seed, summary, tables)


def four_family(seed: int = 0, n: int = 2000, epsilon: float = 1e-3) -> ExperimentResult:
    """Perfectly specified models: CCE near zero everywhere, ECE biased for counts."""
    sets = synthgen.gen_four_family(n, epsilon, seed)
    summary, tables = {"n": n, "epsilon": epsilon}, {}
    for key, (family, (data, model)) in enumerate(sets.items(), start=1):
        gt = data.sample_set
        config = _config(gt, KernelSpec.polynomial())
        emb = ConditionalEmbedding.fit(gt, config.kernel_x, config.lam)
        rep = _model_cce(emb, data, model, config, child_rng(seed, key))
        cal = calibration_report(model.dists, data.ys)
        summary[f"mean_cce_{family}"] = rep.mean
        summary[f"ece_{family}"] = cal.ece
        summary[f"nll_{family}"] = cal.mean_nll
        tables[f"reliability_{family}"] = (["level", "empirical"], _curve_rows(cal))
    discrete = [summary[f"ece_{f}"] for f in synthgen.FOUR_FAMILIES if f != "gaussian"]
    summary["min_discrete_ece_ratio"] = min(discrete) / summary["ece_gaussian"]
    summary["max_mean_cce"] = max(summary[f"mean_cce_{f}"] for f in synthgen.FOUR_FAMILIES)
    return ExperimentResult("four-family", seed, summary, tables)


def lambda_sweep(seed: int = 0, n: int = 1000, m: int = 500,
                 lambdas: Sequence[float] = LAMBDA_GRID) -> ExperimentResult:
    """Larger regularisers smooth the MCMD towards zero."""
    s, sp = synthgen.gen_hyperparam_pair(n, m, seed)
    grid = input_grid()
    ky = KernelSpec.rbf(output_bandwidth(s.outputs))
    rows, columns, means = [], {}, []
    for lam in lambdas:
        prof = mcmd_profile(s, sp, MCMDConfig(ONE_D_KERNEL, ky, lam, lam), grid)
        means.append(float(prof.mean()))
        rows.append([float(lam), means[-1]])
        columns[f"lambda_{lam:g}"] = prof
    summary = {"n": n, "m": m, "lambdas": list(lambdas), "mean_mcmd": means}
    anchor = [means[list(lambdas).index(v)] for v in (0.01, 0.1, 1.0) if v in lambdas]
    summary["decreasing_over_0.01_0.1_1"] = bool(len(anchor) == 3 and anchor[0] > anchor[1] > anchor[2])
    return ExperimentResult("lambda-sweep", seed, summary, {
        "lambda_sweep": (["lambda", "mean_mcmd"], rows),
        "profiles": _sorted_profile(grid, columns),
    })


def gamma_sweep(seed: int = 0, n: int = 1000, m: int = 500,
                gammas: Sequence[float] = GAMMA_GRID) -> ExperimentResult:
    """Same RBF bandwidth in both spaces; larger gamma sharpens the MCMD."""
    s, sp = synthgen.gen_hyperparam_pair(n, m, seed)
    grid = input_grid()
    rows, columns, means = [], {}, []
    for g in gammas:
        k = KernelSpec.rbf(g)
        prof = mcmd_profile(s, sp, MCMDConfig(k, k, 0.1, 0.1), grid)
        means.append(float(prof.mean()))
        rows.append([float(g), means[-1]])
        columns[f"gamma_{g:g}"] = prof
    summary = {"n": n, "m": m, "gammas": list(gammas), "mean_mcmd": means}
    return ExperimentResult("gamma-sweep", seed, summary, {
        "gamma_sweep": (["gamma", "mean_mcmd"], rows),
        "profiles": _sorted_profile(grid, columns),
    })


def kernel_compare(seed: int = 0, n: int = 1000, m: int = 500) -> ExperimentResult:
    """One kernel family in both spaces: RBF, Laplacian, scaled cubic polynomial."""
    s, sp = synthgen.gen_hyperparam_pair(n, m, seed)
    grid = input_grid()
    gy = output_bandwidth(s.outputs)
    configs = {
        "rbf": MCMDConfig(KernelSpec.rbf(2.0), KernelSpec.rbf(gy)),
        "laplacian": MCMDConfig(KernelSpec.laplacian(2.0), KernelSpec.laplacian(gy)),
        "polynomial": MCMDConfig(KernelSpec.polynomial(scale=0.02), KernelSpec.polynomial(scale=0.02)),
    }
    columns, summary = {}, {"n": n, "m": m}
    for name, cfg in configs.items():
        columns[name] = mcmd_profile(s, sp, cfg, grid)
        summary[f"mean_mcmd_{name}"] = float(columns[name].mean())
    # regions of most / least discrepancy should broadly agree
    argmax = {k: float(grid[int(np.argmax(v)), 0]) for k, v in columns.items()}
    summary["argmax_x"] = argmax
    summary["profile_correlation"] = {
        f"{a}_{b}": float(np.corrcoef(columns[a], columns[b])[0, 1])
        for i, a in enumerate(configs) for b in list(configs)[i + 1:]
    }
    return ExperimentResult("kernel-compare", seed, summary, {"profiles": _sorted_profile(grid, columns)})


def _dispersion_setup(seed: int, n: int):
    data, models = synthgen.gen_dispersion_profile(n, seed)
    gt = data.sample_set
    config = _config(gt, ONE_D_KERNEL)
    emb = ConditionalEmbedding.fit(gt, config.kernel_x, config.lam)
    return data, models, config, emb


def ell_sweep(seed: int = 0, n: int = 400, ells: Sequence[int] = ELL_GRID, trials: int = 3,
              models: Sequence[str] = synthgen.DISPERSION_MODELS) -> ExperimentResult:
    """Mean CCE is insensitive to the number of Monte Carlo draws per input."""
    data, specs, config, emb = _dispersion_setup(seed, n)
    rows, summary = [], {"n": n, "ells": list(ells), "trials": trials}
    robust_all = True
    for name in models:
        model, mkey = specs[name], synthgen.DISPERSION_MODELS.index(name) + 1
        means, sds = [], []
        for ell in ells:
            vals = [_model_cce(emb, data, model, config, child_rng(seed, mkey, ell, t), ell=ell).mean
                    for t in range(trials)]
            means.append(float(np.mean(vals)))
            sds.append(float(np.std(vals, ddof=1)))
            rows.append([name, ell, means[-1], sds[-1]] + [float(v) for v in vals])
        pooled = float(np.sqrt(np.mean(np.square(sds))))
        spread = float(np.ptp(means))
        robust = spread < 2 * pooled
        robust_all &= robust
        summary[f"mean_cce_{name}"] = means
        summary[f"range_{name}"] = spread
        summary[f"pooled_sd_{name}"] = pooled
        summary[f"robust_{name}"] = bool(robust)
    summary["robust_all"] = bool(robust_all)
    header = ["model", "ell", "mean_cce", "sd"] + [f"trial_{t}" for t in range(trials)]
    return ExperimentResult("ell-sweep", seed, summary, {"ell_sweep": (header, rows)})


def mcmd_study(seed: int = 0, n: int = 1000, m: int = 500) -> ExperimentResult:
    """MCMD profiles for six kinds of conditional mismatch under two noise models."""
    grid = input_grid()
    rows, tables, summary = [], {}, {"n": n, "m": m}
    for nkey, noise in enumerate(synthgen.NOISE_MODELS):
        columns, means = {}, {}
        for skey, scenario in enumerate(synthgen.MCMD_SCENARIOS):
            s, sp = synthgen.gen_mcmd_study(scenario, n, m, child_seed(seed, nkey, skey), noise)
            columns[scenario] = mcmd_profile(s, sp, _config(s, STUDY_KERNEL), grid)
            means[scenario] = float(columns[scenario].mean())
            rows.append([noise, scenario, means[scenario]])
        tables[f"profiles_{noise}"] = _sorted_profile(grid, columns)
        summary[f"mean_mcmd_{noise}"] = means
        summary[f"same_smallest_{noise}"] = bool(min(means, key=means.get) == "same")
        summary[f"low_variance_penalty_{noise}"] = bool(
            means["diff-mean-lower-var"] > means["diff-mean-higher-var"])
    tables["mcmd_study"] = (["noise", "scenario", "mean_mcmd"], rows)
    return ExperimentResult("mcmd-study", seed, summary, tables)


def dispersion_profile(seed: int = 0, n: int = 2000) -> ExperimentResult:
    """Four count models against a Double Poisson DGP with changing dispersion."""
    data, models, config, emb = _dispersion_setup(seed, n)
    x = data.xs[:, 0]
    upper = x >= math.pi
    summary, columns, tables = {"n": n}, {}, {}
    for key, (name, model) in enumerate(models.items(), start=1):
        rep = _model_cce(emb, data, model, config, child_rng(seed, key))
        cal = calibration_report(model.dists, data.ys)
        columns[name] = rep.values
        summary[f"mean_cce_{name}"] = rep.mean
        summary[f"mean_cce_lower_half_{name}"] = float(rep.values[~upper].mean())
        summary[f"mean_cce_upper_half_{name}"] = float(rep.values[upper].mean())
        summary[f"ece_{name}"] = cal.ece
        summary[f"nll_{name}"] = cal.mean_nll
        tables[f"reliability_{name}"] = (["level", "empirical"], _curve_rows(cal))
    ranking = sorted(models, key=lambda k: summary[f"mean_cce_{k}"])
    summary["ranking"] = ranking
    tables["profile"] = _sorted_profile(data.xs, columns)
    return ExperimentResult("dispersion-profile", seed, summary, tables)


def reject(seed: int = 0, n: int = 2000, n_thresholds: int = 25) -> ExperimentResult:
    """CCE as an unreliability score: withhold predictions above a threshold.

    The validation split is the ground truth and CCE is evaluated, label
    free, at the test inputs. A random hold-out of matching size is the
    baseline.
    """
    val = synthgen.gen_reject_dgp(n, child_seed(seed, 1))
    test = synthgen.gen_reject_dgp(n, child_seed(seed, 2))
    val_model = synthgen.reject_model(val.xs)
    test_model = synthgen.reject_model(test.xs)
    gt = val.sample_set
    config = _config(gt, ONE_D_KERNEL)
    emb = ConditionalEmbedding.fit(gt, config.kernel_x, config.lam)
    rep = _model_cce(emb, val, val_model, config, child_rng(seed, 3), queries=test.xs)
    thresholds = np.linspace(0.0, float(rep.values.max()), n_thresholds)
    preds = point_predictions(test_model.dists)
    sweep = reject_sweep(rep.values, preds, test_model.dists, test.ys, thresholds)

    rng = child_rng(seed, 4)
    order = rng.permutation(n)
    abs_err = np.abs(preds - test.ys)
    point_nll = np.array([nll(d, y) for d, y in zip(test_model.dists, test.ys)])
    rows = []
    for tau, frac, mae, nl in zip(sweep.thresholds, sweep.retained_fraction, sweep.mae, sweep.nll):
        keep = order[: int(round(frac * n))]
        r_mae = float(abs_err[keep].mean()) if keep.size else math.nan
        r_nll = float(point_nll[keep].mean()) if keep.size else math.nan
        rows.append([float(tau), float(frac), float(mae), float(nl), r_mae, r_nll])

    nonempty = np.flatnonzero(sweep.retained_fraction > 0)
    strict = int(nonempty[0])
    summary = {
        "n": n,
        "full_mae": float(sweep.mae[-1]),
        "full_nll": float(sweep.nll[-1]),
        "strictest_retained_fraction": float(sweep.retained_fraction[strict]),
        "strictest_mae": float(sweep.mae[strict]),
        "strictest_nll": float(sweep.nll[strict]),
        "retained_fraction_nondecreasing": bool(np.all(np.diff(sweep.retained_fraction) >= 0)),
        "mean_cce_misspecified_regions": float(rep.values[_in_flawed_region(test.xs[:, 0])].mean()),
        "mean_cce_elsewhere": float(rep.values[~_in_flawed_region(test.xs[:, 0])].mean()),
    }
    header = ["threshold", "retained_fraction", "mae", "nll", "random_mae", "random_nll"]
    return ExperimentResult("reject", seed, summary, {
        "reject_sweep": (header, rows),
        "test_cce": _sorted_profile(test.xs, {"cce": rep.values}),
    })


def _in_flawed_region(x):
    (a, b), (c, d) = synthgen.REJECT_MEAN_SHIFT_REGION, synthgen.REJECT_OVERCONFIDENT_REGION
    return ((x >= a) & (x <= b)) | ((x >= c) & (x <= d))


def downsample_stability(seed: int = 0, n: int = 2000, fractions: Sequence[float] = FRACTIONS,
                         trials: int = 5) -> ExperimentResult:
    """Model ranking under mean CCE on uniform subsamples of the evaluation set."""
    data, models = synthgen.gen_dispersion_profile(n, seed)
    names = list(models)

    def mean_cces(idx, key):
        subset = data.take(idx)
        gt = subset.sample_set
        config = _config(gt, ONE_D_KERNEL)
        emb = ConditionalEmbedding.fit(gt, config.kernel_x, config.lam)
        return {name: _model_cce(emb, subset, models[name].take(idx), config,
                                 child_rng(seed, *key, mk)).mean
                for mk, name in enumerate(names)}

    full = mean_cces(np.arange(n), (0, 0))
    best, worst = min(full, key=full.get), max(full, key=full.get)
    rows, summary = [], {"n": n, "fractions": list(fractions), "trials": trials,
                         "full": full, "full_best": best, "full_worst": worst}
    for fi, frac in enumerate(fractions, start=1):
        k = max(2, int(round(frac * n)))
        agree = 0
        for t in range(trials):
            key = (fi, t + 1)
            idx = np.sort(child_rng(seed, *key).choice(n, size=k, replace=False))
            vals = mean_cces(idx, key)
            b, w = min(vals, key=vals.get), max(vals, key=vals.get)
            agree += int(b == best and w == worst)
            order = sorted(vals, key=vals.get)
            rows.append([float(frac), t] + [float(vals[m]) for m in names] + ["<".join(order)])
        summary[f"agreements_{frac:g}"] = agree
    header = ["fraction", "trial"] + [f"mean_cce_{m}" for m in names] + ["ordering"]
    return ExperimentResult("downsample-stability", seed, summary, {"downsample": (header, rows)})


EXPERIMENTS: Dict[str, Callable[..., ExperimentResult]] = {
    "fig1-marginal": fig1_marginal,
    "four-family": four_family,
    "lambda-sweep": lambda_sweep,
    "gamma-sweep": gamma_sweep,
    "kernel-compare": kernel_compare,
    "ell-sweep": ell_sweep,
    "mcmd-study": mcmd_study,
    "dispersion-profile": dispersion_profile,
    "reject": reject,
    "downsample-stability": downsample_stability,
}


def run_experiment(name: str, seed: int = 0, **kwargs) -> ExperimentResult:
    try:
        runner = EXPERIMENTS[name]
    except KeyError:
        raise ValueError(f"unknown experiment {name!r}; expected one of {sorted(EXPERIMENTS)}") from None
    return runner(seed=seed, **kwargs)
