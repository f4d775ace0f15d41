"""Predictive distributions: Gaussian, Poisson, Negative Binomial, Double Poisson.

Discrete families are evaluated in log space with ``gammaln`` and carry a
truncated :class:`DiscreteSupport` that is used for normalisation (Double
Poisson), CDF prefix sums and inverse-CDF sampling.

Negative Binomial convention: mass ``C(y+r-1, y) p^r (1-p)^y`` on
``y = 0, 1, 2, ...``, mean ``r(1-p)/p``, variance ``r(1-p)/p^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, Union

import numpy as np
from scipy import special

TAIL_TOLERANCE = 1e-12
_SIGMAS = 30.0


class InvalidSupportValue(ValueError):
    """A discrete density was asked for a value outside {0, 1, 2, ...}."""


@dataclass(frozen=True)
class DiscreteSupport:
    lower: int
    upper: int

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"invalid support [{self.lower}, {self.upper}]")

    @property
    def values(self) -> np.ndarray:
        return np.arange(self.lower, self.upper + 1, dtype=float)


def _as_count(y) -> int:
    y = float(y)
    if not math.isfinite(y) or y < 0 or y != math.floor(y):
        raise InvalidSupportValue(f"{y!r} is not a nonnegative integer")
    return int(y)


@dataclass(frozen=True)
class Gaussian:
    mu: float
    sigma2: float
    family: ClassVar[str] = "gaussian"

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValueError(f"invalid Gaussian parameters mu={self.mu}, sigma2={self.sigma2}")

    @property
    def params(self) -> tuple:
        return (self.mu, self.sigma2)

    def mean(self) -> float:
        return float(self.mu)

    def variance(self) -> float:
        return float(self.sigma2)

    def logpdf(self, y) -> float:
        z2 = (float(y) - self.mu) ** 2 / self.sigma2
        return -0.5 * (math.log(2 * math.pi * self.sigma2) + z2)

    def cdf(self, y) -> float:
        return float(special.ndtr((float(y) - self.mu) / math.sqrt(self.sigma2)))

    def quantile(self, u) -> np.ndarray:
        return self.mu + math.sqrt(self.sigma2) * special.ndtri(np.asarray(u, dtype=float))


class _Discrete:
    """Shared machinery for count distributions on a truncated support."""

    family: ClassVar[str]

    def _unnormalised_logpmf(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _moment_proxy(self) -> tuple:
        raise NotImplementedError

    def _tail_mass(self, upper: int) -> float:
        raise NotImplementedError

    @cached_property
    def support(self) -> DiscreteSupport:
        mean, var = self._moment_proxy()
        upper = int(math.ceil(mean + _SIGMAS * math.sqrt(var)))
        while self._tail_mass(upper) >= TAIL_TOLERANCE:
            upper = 2 * upper + 1
        return DiscreteSupport(0, upper)

    @cached_property
    def _log_norm(self) -> float:
        return 0.0

    @cached_property
    def table(self) -> np.ndarray:
        """pmf over the support. Read-only."""
        p = np.exp(self.logpmf_array(self.support.values))
        p.setflags(write=False)
        return p

    @cached_property
    def _cumulative(self) -> np.ndarray:
        c = np.cumsum(self.table)
        c.setflags(write=False)
        return c

    def logpmf_array(self, ys: np.ndarray) -> np.ndarray:
        return self._unnormalised_logpmf(np.asarray(ys, dtype=float)) - self._log_norm

    def logpdf(self, y) -> float:
        k = _as_count(y)
        return float(self.logpmf_array(np.array([k], dtype=float))[0])

    def cdf(self, y) -> float:
        y = float(y)
        if math.isnan(y):
            raise ValueError("cdf of NaN")
        if y < 0:
            return 0.0
        k = math.floor(y)
        if k > self.support.upper:
            return 1.0
        return float(min(1.0, self._cumulative[k - self.support.lower]))

    def quantile(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self._cumulative, u, side="left")
        idx = np.minimum(idx, self.support.upper - self.support.lower)
        return (idx + self.support.lower).astype(float)

    def mean(self) -> float:
        return float(self.table @ self.support.values)

    def variance(self) -> float:
        v = self.support.values
        m = self.mean()
        return float(self.table @ (v - m) ** 2)


@dataclass(frozen=True)
class Poisson(_Discrete):
    rate: float
    family: ClassVar[str] = "poisson"

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"Poisson rate must be positive, got {self.rate}")

    @property
    def params(self) -> tuple:
        return (self.rate,)

    def _unnormalised_logpmf(self, y):
        return special.xlogy(y, self.rate) - self.rate - special.gammaln(y + 1)

    def _moment_proxy(self):
        return self.rate, self.rate

    def _tail_mass(self, upper):
        return float(special.pdtrc(upper, self.rate))

    def mean(self) -> float:
        return float(self.rate)

    def variance(self) -> float:
        return float(self.rate)


@dataclass(frozen=True)
class NegativeBinomial(_Discrete):
    r: float
    p: float
    family: ClassVar[str] = "negbinom"

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r) and 0 < self.p < 1):
            raise ValueError(f"invalid NegativeBinomial parameters r={self.r}, p={self.p}")

    @property
    def params(self) -> tuple:
        return (self.r, self.p)

    def _unnormalised_logpmf(self, y):
        return (special.gammaln(y + self.r) - special.gammaln(self.r) - special.gammaln(y + 1)
                + self.r * math.log(self.p) + y * math.log1p(-self.p))

    def _moment_proxy(self):
        return self.mean(), self.variance()

    def _tail_mass(self, upper):
        # P(Y > k) = I_{1-p}(k + 1, r)
        return float(special.betainc(upper + 1, self.r, 1 - self.p))

    def mean(self) -> float:
        return self.r * (1 - self.p) / self.p

    def variance(self) -> float:
        return self.r * (1 - self.p) / self.p ** 2


@dataclass(frozen=True)
class DoublePoisson(_Discrete):
    """Efron's double Poisson, normalised exactly over the truncated support.

    Unnormalised mass ``phi^{1/2} e^{-phi mu} (e^{-y} y^y / y!) (e mu / y)^{phi y}``;
    ``phi = 1`` recovers ``Poisson(mu)``, ``phi < 1`` is over-dispersed and
    ``phi > 1`` under-dispersed (variance roughly ``mu / phi``).
    """

    mu: float
    phi: float
    family: ClassVar[str] = "doublepoisson"

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu) and self.phi > 0 and math.isfinite(self.phi)):
            raise ValueError(f"invalid DoublePoisson parameters mu={self.mu}, phi={self.phi}")

    @property
    def params(self) -> tuple:
        return (self.mu, self.phi)

    def _unnormalised_logpmf(self, y):
        logy = np.log(np.where(y > 0, y, 1.0))
        return (0.5 * math.log(self.phi) - self.phi * self.mu
                - y + special.xlogy(y, y) - special.gammaln(y + 1)
                + self.phi * y * (1.0 + math.log(self.mu) - logy))

    def _moment_proxy(self):
        return self.mu, max(self.mu / self.phi, 1.0)

    def _tail_mass(self, upper):
        # terms decay faster than geometrically past the mode, so
        # t(k+1) / (1 - t(k+2)/t(k+1)) bounds the tail
        ks = np.array([0.0, upper + 1.0, upper + 2.0])
        lp = self._unnormalised_logpmf(ks)
        ratio = math.exp(lp[2] - lp[1])
        if ratio >= 1:
            return 1.0
        log_mass = special.logsumexp(self._unnormalised_logpmf(np.arange(upper + 1, dtype=float)))
        return math.exp(lp[1] - log_mass) / (1 - ratio)

    @cached_property
    def _log_norm(self) -> float:
        return float(special.logsumexp(self._unnormalised_logpmf(self.support.values)))


PredictiveDistribution = Union[Gaussian, Poisson, NegativeBinomial, DoublePoisson]

FAMILY_TYPES = {cls.family: cls for cls in (Gaussian, Poisson, NegativeBinomial, DoublePoisson)}


def from_params(family: str, params) -> PredictiveDistribution:
    """Build a distribution from its family name and canonical parameter list."""
    try:
        cls = FAMILY_TYPES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(FAMILY_TYPES)}") from None
    params = [float(p) for p in params]
    expected = {"gaussian": 2, "poisson": 1, "negbinom": 2, "doublepoisson": 2}[family]
    if len(params) != expected:
        raise ValueError(f"{family} takes {expected} parameters, got {len(params)}")
    return cls(*params)


def density(d: PredictiveDistribution, y) -> float:
    """pdf (Gaussian) or exactly normalised pmf (discrete families)."""
    return math.exp(d.logpdf(y))


def cdf(d: PredictiveDistribution, y) -> float:
    return d.cdf(y)


def nll(d: PredictiveDistribution, y) -> float:
    """Negative log density; ``inf`` where the density is zero (outside support)."""
    try:
        return -d.logpdf(y)
    except InvalidSupportValue:
        return math.inf


def open_uniforms(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform draws on ``(0, 1)``, the input to every inverse-CDF sampler."""
    u = rng.random(shape)
    # ndtri(0) = -inf
    return np.where(u > 0, u, np.nextafter(0.0, 1.0))


def sample(d: PredictiveDistribution, count: int, seed) -> np.ndarray:
    """``count`` draws by inverse-CDF transform of seeded uniforms."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return d.quantile(open_uniforms(rng, count))


def nb_from_moments(mean: float, variance: float) -> NegativeBinomial:
    """Negative Binomial with the requested mean and variance (needs variance > mean)."""
    if not mean > 0:
        raise ValueError(f"mean must be positive, got {mean}")
    if not variance > mean:
        raise ValueError(f"negative binomial needs variance > mean, got mean={mean}, variance={variance}")
    return NegativeBinomial(mean ** 2 / (variance - mean), mean / variance)
