"""Seeded data-generating processes and their paired analytic models.

Every generator takes an integer seed and is deterministic for it. Inputs
are one-dimensional and used directly as conditioning vectors (identity
embedding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .distributions import (DoublePoisson, Gaussian, Poisson, PredictiveDistribution,
                            open_uniforms, nb_from_moments)
from .mcmd import SampleSet

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class LabeledDataset:
    xs: np.ndarray
    ys: np.ndarray
    dgp_name: str
    seed: int

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.ndim == 1:
            xs = xs[:, None]
        ys = np.asarray(self.ys, dtype=float).ravel()
        if xs.shape[0] != ys.shape[0] or ys.shape[0] < 1:
            raise ValueError("xs and ys must be nonempty and of equal length")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self):
        return self.ys.shape[0]

    @property
    def sample_set(self) -> SampleSet:
        return SampleSet(self.xs, self.ys)

    def take(self, indices) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=int)
        return LabeledDataset(self.xs[indices], self.ys[indices], self.dgp_name, self.seed)


@dataclass(frozen=True)
class ModelSpec:
    """One predictive distribution per dataset point."""

    name: str
    dists: Tuple[PredictiveDistribution, ...]

    def __len__(self):
        return len(self.dists)

    def take(self, indices) -> "ModelSpec":
        return ModelSpec(self.name, tuple(self.dists[int(i)] for i in indices))


def _check_n(n, label="n"):
    if n < 2:
        raise ValueError(f"{label} must be >= 2, got {n}")


def draw(dists: Sequence[PredictiveDistribution], rng: np.random.Generator) -> np.ndarray:
    """One inverse-CDF draw from each distribution."""
    u = open_uniforms(rng, len(dists))
    return np.array([float(d.quantile(ui)) for d, ui in zip(dists, u)])


def gen_marginal_flaw(n: int, alpha: float = 3.0, seed: int = 0):
    """``X ~ N(0, 1)``, ``Y | X ~ N(alpha X, 1)``.

    Returns the dataset, the congruent model ``N(alpha x, 1)`` and the
    marginal model ``N(0, 1 + alpha^2)`` that ignores ``x``.
    """
    _check_n(n)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    y = alpha * x + rng.standard_normal(n)
    data = LabeledDataset(x, y, "marginal-flaw", seed)
    congruent = ModelSpec("congruent", tuple(Gaussian(alpha * xi, 1.0) for xi in x))
    marginal_dist = Gaussian(0.0, 1.0 + alpha ** 2)
    marginal = ModelSpec("marginal", (marginal_dist,) * n)
    return data, congruent, marginal


FOUR_FAMILIES = ("gaussian", "poisson", "negbinom", "doublepoisson")


def four_family_dists(family: str, x: np.ndarray, epsilon: float) -> Tuple[PredictiveDistribution, ...]:
    if family == "gaussian":
        return tuple(Gaussian(xi, xi) for xi in x)
    if family == "poisson":
        return tuple(Poisson(xi) for xi in x)
    if family == "negbinom":
        return tuple(nb_from_moments(xi, xi * (1 + epsilon)) for xi in x)
    if family == "doublepoisson":
        return tuple(DoublePoisson(xi, 1.0) for xi in x)
    raise ValueError(f"unknown family {family!r}")


def gen_four_family(n: int = 2000, epsilon: float = 1e-3, seed: int = 0) -> Dict[str, Tuple[LabeledDataset, ModelSpec]]:
    """Four DGPs whose conditionals all have mean ``X`` and variance ``~X``.

    ``X ~ Uniform(1, 10)``; ``Y | X`` is ``Gaussian(X, X)``, ``Poisson(X)``,
    a Negative Binomial with mean ``X`` and variance ``X (1 + epsilon)``, or
    ``DoublePoisson(X, 1)``. Each family gets its own input draw. The model
    returned with each dataset is the exact DGP.
    """
    _check_n(n)
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    seeds = np.random.SeedSequence(seed).spawn(len(FOUR_FAMILIES))
    out = {}
    for family, ss in zip(FOUR_FAMILIES, seeds):
        rng = np.random.default_rng(ss)
        x = rng.uniform(1.0, 10.0, n)
        dists = four_family_dists(family, x, epsilon)
        data = LabeledDataset(x, draw(dists, rng), f"four-family/{family}", seed)
        out[family] = (data, ModelSpec(family, dists))
    return out


def reject_mean(x):
    x = np.asarray(x, dtype=float)
    return x * np.cos(x) ** 2 - np.sqrt(np.abs(x) + 3)


def reject_variance(x):
    x = np.asarray(x, dtype=float)
    return (2 * np.abs(2 - x) + 1) / 8


# input regions where the rejection-study model is wrong, and how
REJECT_MEAN_SHIFT_REGION = (0.5, 1.5)
REJECT_MEAN_SHIFT = 1.0
REJECT_OVERCONFIDENT_REGION = (4.0, 5.0)
REJECT_VARIANCE_FACTOR = 0.2


def gen_reject_dgp(n: int, seed: int = 0) -> LabeledDataset:
    """``X ~ U(0, 2pi)``, ``Y | X ~ N(X cos^2 X - sqrt(|X| + 3), (2|2 - X| + 1) / 8)``."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, TWO_PI, n)
    y = reject_mean(x) + np.sqrt(reject_variance(x)) * rng.standard_normal(n)
    return LabeledDataset(x, y, "reject", seed)


def reject_model(xs, misspecified: bool = True) -> ModelSpec:
    """Gaussian model for the rejection DGP.

    With ``misspecified=True`` the mean is shifted on one input interval and
    the variance shrunk (overconfidence) on another; elsewhere it is exact.
    """
    x = np.asarray(xs, dtype=float).ravel()
    mean = reject_mean(x)
    var = reject_variance(x)
    if misspecified:
        lo, hi = REJECT_MEAN_SHIFT_REGION
        mean = np.where((x >= lo) & (x <= hi), mean + REJECT_MEAN_SHIFT, mean)
        lo, hi = REJECT_OVERCONFIDENT_REGION
        var = np.where((x >= lo) & (x <= hi), var * REJECT_VARIANCE_FACTOR, var)
    name = "misspecified" if misspecified else "exact"
    return ModelSpec(name, tuple(Gaussian(m, v) for m, v in zip(mean, var)))


def gen_hyperparam_pair(n: int = 1000, m: int = 500, seed: int = 0) -> Tuple[SampleSet, SampleSet]:
    """``Y | X ~ N(cos X, 1/4)`` against ``Y' | X' ~ N(X' - 5, 1/4)``, inputs on ``U(0, 2pi)``."""
    _check_n(n)
    _check_n(m, "m")
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, TWO_PI, n)
    y = np.cos(x) + 0.5 * rng.standard_normal(n)
    xp = rng.uniform(0.0, TWO_PI, m)
    yp = xp - 5 + 0.5 * rng.standard_normal(m)
    return SampleSet(x, y), SampleSet(xp, yp)


MCMD_SCENARIOS = ("same", "same-mean-lower-var", "same-mean-higher-var",
                  "diff-mean-lower-var", "diff-mean-higher-var", "diff-relationship")
NOISE_MODELS = ("heteroscedastic", "homoscedastic")
MEAN_OFFSET = 1.5


def _base_sd(x, noise):
    if noise == "heteroscedastic":
        return 0.2 + 0.2 * x
    return np.full_like(x, 0.5)


def mcmd_study_moments(scenario: str, x, noise: str = "heteroscedastic"):
    """Conditional mean and standard deviation of the comparison sample."""
    if scenario not in MCMD_SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; expected one of {MCMD_SCENARIOS}")
    if noise not in NOISE_MODELS:
        raise ValueError(f"unknown noise model {noise!r}; expected one of {NOISE_MODELS}")
    x = np.asarray(x, dtype=float)
    mean = np.sin(x)
    sd = _base_sd(x, noise)
    if scenario.endswith("lower-var"):
        sd = 0.5 * sd
    elif scenario.endswith("higher-var"):
        sd = 2.0 * sd
    if scenario.startswith("diff-mean"):
        mean = mean + MEAN_OFFSET
    elif scenario == "diff-relationship":
        mean = -mean
    return mean, sd


def gen_mcmd_study(scenario: str, n: int = 1000, m: int = 500, seed: int = 0,
                   noise: str = "heteroscedastic") -> Tuple[SampleSet, SampleSet]:
    """Ground truth ``Y | X ~ N(sin X, sd(X)^2)`` on ``U(0, 2pi)`` plus a comparison sample.

    ``sd(x) = 0.2 + 0.2 x`` (heteroscedastic) or ``0.5`` (homoscedastic).
    The comparison sample scales ``sd`` by 0.5 / 2 for lower / higher
    variance, adds 1.5 to the mean for "diff-mean" scenarios and negates
    the mean for "diff-relationship".
    """
    _check_n(n)
    _check_n(m, "m")
    mean_p, sd_p = mcmd_study_moments(scenario, np.zeros(1), noise)  # validates names
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, TWO_PI, n)
    y = np.sin(x) + _base_sd(x, noise) * rng.standard_normal(n)
    xp = rng.uniform(0.0, TWO_PI, m)
    mean_p, sd_p = mcmd_study_moments(scenario, xp, noise)
    yp = mean_p + sd_p * rng.standard_normal(m)
    return SampleSet(x, y), SampleSet(xp, yp)


DISPERSION_MODELS = ("doublepoisson", "gaussian", "poisson", "negbinom")
DISPERSION_OVER = 0.2
DISPERSION_UNDER = 10.0


def dispersion_mu(x):
    return 10.0 - 8.0 * np.sin(np.asarray(x, dtype=float))


def dispersion_phi(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < math.pi, DISPERSION_OVER, DISPERSION_UNDER)


def dispersion_models(xs) -> Dict[str, ModelSpec]:
    """Exact Double Poisson DGP plus three moment-matched stand-ins.

    The Gaussian matches the DGP's mean and variance. The Negative Binomial
    matches them where the DGP is over-dispersed and falls back to
    ``Poisson(mu(x))`` where it cannot (under-dispersion).
    """
    x = np.asarray(xs, dtype=float).ravel()
    exact = tuple(DoublePoisson(m, p) for m, p in zip(dispersion_mu(x), dispersion_phi(x)))
    gauss, pois, nb = [], [], []
    for d in exact:
        mean, var = d.mean(), d.variance()
        gauss.append(Gaussian(mean, var))
        pois.append(Poisson(d.mu))
        nb.append(nb_from_moments(mean, var) if var > mean else Poisson(d.mu))
    return {
        "doublepoisson": ModelSpec("doublepoisson", exact),
        "gaussian": ModelSpec("gaussian", tuple(gauss)),
        "poisson": ModelSpec("poisson", tuple(pois)),
        "negbinom": ModelSpec("negbinom", tuple(nb)),
    }


def gen_dispersion_profile(n: int, seed: int = 0):
    """Counts with over-dispersion at low counts and strong under-dispersion at high counts.

    ``X ~ U(0, 2pi)``, ``Y | X ~ DoublePoisson(10 - 8 sin X, phi(X))`` with
    ``phi = 0.2`` on ``[0, pi)`` and ``10`` on ``[pi, 2pi)``.
    """
    _check_n(n)
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, TWO_PI, n)
    models = dispersion_models(x)
    y = draw(models["doublepoisson"].dists, rng)
    return LabeledDataset(x, y, "dispersion-profile", seed), models


GENERATORS = ("marginal-flaw", "four-family", "reject", "hyperparam-pair", "mcmd-study",
              "dispersion-profile")
