"""Closed-form squared MCMD between two conditional samples.

For samples ``S = (x_i, y_i)`` and ``S' = (x'_j, y'_j)`` the squared
discrepancy at a conditioning point ``q`` is

    a^T K_Y a - 2 a^T K_YY' b + b^T K_Y' b,   a = W kx(q),  b = W' kx'(q)

with ``W = (K_X + n lam I)^{-1}`` and ``W' = (K_X' + m lam' I)^{-1}``.
``a`` and ``b`` come from triangular solves against a Cholesky factor; an
explicit inverse loses several digits on the polynomial kernel, whose Gram
matrices are badly conditioned. When both samples share conditioning points
and regulariser, ``a = b`` and the three forms fold into one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .kernels import KernelSpec, cross_gram, gram

DEFAULT_LAMBDA = 0.1


class CholeskyFailure(np.linalg.LinAlgError):
    """The regularised Gram matrix was not positive definite."""


@dataclass(frozen=True)
class SampleSet:
    """Paired draws: conditioning vectors (n, d) and scalar outputs (n,)."""

    conditioning: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.conditioning, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.asarray(self.outputs, dtype=float).ravel()
        if x.ndim != 2 or x.shape[1] == 0:
            raise ValueError(f"conditioning must be a list of vectors, got shape {x.shape}")
        if x.shape[0] == 0:
            raise ValueError("empty sample set")
        if x.shape[0] != y.shape[0]:
            raise ValueError(f"{x.shape[0]} conditioning vectors but {y.shape[0]} outputs")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("sample contains non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "conditioning", x)
        object.__setattr__(self, "outputs", y)

    def __len__(self):
        return self.outputs.shape[0]

    @property
    def dim(self) -> int:
        return self.conditioning.shape[1]

    def take(self, indices) -> "SampleSet":
        indices = np.asarray(indices, dtype=int)
        return SampleSet(self.conditioning[indices], self.outputs[indices])


@dataclass(frozen=True)
class MCMDConfig:
    kernel_x: KernelSpec
    kernel_y: KernelSpec
    lam: float = DEFAULT_LAMBDA
    lam_prime: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if not (self.lam > 0 and self.lam_prime > 0):
            raise ValueError(f"regularisers must be positive, got {self.lam}, {self.lam_prime}")

    def swapped(self) -> "MCMDConfig":
        return MCMDConfig(self.kernel_x, self.kernel_y, self.lam_prime, self.lam)


def regularized_factor(k, lam: float, n: int) -> np.ndarray:
    """Lower Cholesky factor of ``K + n lam I``.

    Raises
    ------
    CholeskyFailure
        If ``K + n lam I`` is not positive definite.
    """
    if not lam > 0:
        raise CholeskyFailure(f"lambda must be positive, got {lam}")
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {k.shape}")
    if not np.isfinite(k).all():
        raise CholeskyFailure("Gram matrix has non-finite entries")
    a = k + (n * lam) * np.eye(k.shape[0])
    c, info = lapack.dpotrf(a, lower=1, clean=1)
    if info != 0:
        raise CholeskyFailure(f"Cholesky factorisation failed (info={info})")
    return c


def regularized_inverse(k, lam: float, n: int) -> np.ndarray:
    """``(K + n lam I)^{-1}`` through a Cholesky factorisation.

    Raises
    ------
    CholeskyFailure
        If ``K + n lam I`` is not positive definite.
    """
    inv, info = lapack.dpotri(regularized_factor(k, lam, n), lower=1)
    if info != 0:
        raise CholeskyFailure(f"inverse from Cholesky factor failed (info={info})")
    # dpotri fills only the lower triangle
    lower = np.tril(inv)
    return lower + np.tril(inv, -1).T


@dataclass(frozen=True, eq=False)
class ConditionalEmbedding:
    """Fitted conditional mean embedding of one sample.

    Holds the Cholesky factor of ``K_X + n lam I`` so several comparisons
    against the same sample (e.g. several models against one ground truth)
    share it.
    """

    sample: SampleSet
    kernel_x: KernelSpec
    lam: float
    factor: np.ndarray = field(repr=False)

    @classmethod
    def fit(cls, sample: SampleSet, kernel_x: KernelSpec, lam: float) -> "ConditionalEmbedding":
        k = gram(kernel_x, sample.conditioning)
        return cls(sample, kernel_x, lam, regularized_factor(k, lam, len(sample)))

    def with_outputs(self, outputs) -> "ConditionalEmbedding":
        """Same conditioning points and factor, different outputs."""
        return ConditionalEmbedding(SampleSet(self.sample.conditioning, outputs),
                                    self.kernel_x, self.lam, self.factor)

    def solve(self, kx: np.ndarray) -> np.ndarray:
        """``(K_X + n lam I)^{-1} kx`` for a column block ``kx``."""
        a, info = lapack.dpotrs(self.factor, kx, lower=1)
        if info != 0:
            raise CholeskyFailure(f"triangular solve failed (info={info})")
        return a

    def reusable_for(self, sample: SampleSet, kernel_x: KernelSpec, lam: float) -> bool:
        return (kernel_x == self.kernel_x and lam == self.lam
                and np.array_equal(sample.conditioning, self.sample.conditioning))


def _fit_or_reuse(sample, kernel_x, lam, other: ConditionalEmbedding | None):
    if other is not None and other.reusable_for(sample, kernel_x, lam):
        return other.with_outputs(sample.outputs)
    return ConditionalEmbedding.fit(sample, kernel_x, lam)


class MCMDEstimator:
    """Squared MCMD between two samples, precomputed for repeated queries.

    Parameters
    ----------
    s, s_prime : SampleSet or ConditionalEmbedding
        The two samples. Passing a fitted embedding reuses its inverse.
    config : MCMDConfig
    """

    def __init__(self, s, s_prime, config: MCMDConfig):
        self.config = config
        emb = s if isinstance(s, ConditionalEmbedding) else None
        if emb is None:
            emb = ConditionalEmbedding.fit(s, config.kernel_x, config.lam)
        elif emb.kernel_x != config.kernel_x or emb.lam != config.lam:
            raise ValueError("embedding was fitted with a different kernel or lambda")
        if isinstance(s_prime, ConditionalEmbedding):
            emb_p = s_prime
            if emb_p.kernel_x != config.kernel_x or emb_p.lam != config.lam_prime:
                raise ValueError("embedding was fitted with a different kernel or lambda")
        else:
            emb_p = _fit_or_reuse(s_prime, config.kernel_x, config.lam_prime, emb)
        if emb.sample.dim != emb_p.sample.dim:
            raise ValueError(f"conditioning dimension mismatch: {emb.sample.dim} vs {emb_p.sample.dim}")
        self.embedding = emb
        self.embedding_prime = emb_p

        y, yp = emb.sample.outputs, emb_p.sample.outputs
        ky = gram(config.kernel_y, y).entries
        kyp = gram(config.kernel_y, yp).entries
        kyyp = cross_gram(config.kernel_y, y, yp).entries
        # one shared factor and one set of conditioning points: a = b, so the
        # three quadratic forms collapse into one
        self.shared = emb_p.factor is emb.factor
        if self.shared:
            self.combined = (ky - kyyp) + (kyp - kyyp.T)
        else:
            self.ky, self.kyp, self.kyyp = ky, kyp, kyyp

    @property
    def dim(self) -> int:
        return self.embedding.sample.dim

    def as_queries(self, queries) -> np.ndarray:
        q = np.asarray(queries, dtype=float)
        if q.ndim == 1:
            q = q[None, :] if self.dim > 1 or q.size == 1 else q[:, None]
        if q.ndim != 2 or q.shape[1] != self.dim:
            raise ValueError(f"query dimension mismatch: expected {self.dim}, got shape {q.shape}")
        if q.shape[0] == 0:
            raise ValueError("no queries")
        return q

    def squared(self, queries) -> np.ndarray:
        """Raw squared MCMD per query; may be slightly negative."""
        q = self.as_queries(queries)
        kx = cross_gram(self.config.kernel_x, self.embedding.sample.conditioning, q).entries
        a = self.embedding.solve(kx)
        if self.shared:
            return np.einsum("iq,iq->q", a, self.combined @ a)
        kxp = cross_gram(self.config.kernel_x, self.embedding_prime.sample.conditioning, q).entries
        b = self.embedding_prime.solve(kxp)
        t1 = np.einsum("iq,iq->q", a, self.ky @ a)
        t2 = np.einsum("iq,iq->q", a, self.kyyp @ b)
        t3 = np.einsum("iq,iq->q", b, self.kyp @ b)
        return t1 - 2.0 * t2 + t3

    def profile(self, queries) -> np.ndarray:
        """``sqrt(max(0, MCMD^2))`` per query."""
        sq = self.squared(queries)
        if not np.isfinite(sq).all():
            raise FloatingPointError("non-finite squared MCMD; check kernel scaling")
        return np.sqrt(np.maximum(sq, 0.0))


def mcmd_sq_at(s: SampleSet, s_prime: SampleSet, config: MCMDConfig, query) -> float:
    """Squared MCMD at a single conditioning point, returned unclamped."""
    q = np.atleast_1d(np.asarray(query, dtype=float))
    if q.ndim != 1:
        raise ValueError("query must be a single vector")
    return float(MCMDEstimator(s, s_prime, config).squared(q[None, :])[0])


def mcmd_profile(s: SampleSet, s_prime: SampleSet, config: MCMDConfig, queries) -> np.ndarray:
    """MCMD (square root of the clamped estimate) at every query point."""
    return MCMDEstimator(s, s_prime, config).profile(queries)


def downsample(s: SampleSet, k: int, seed: int) -> SampleSet:
    """``k`` pairs drawn uniformly without replacement."""
    n = len(s)
    if k < 1:
        raise ValueError(f"downsample size must be >= 1, got {k}")
    if k > n:
        raise ValueError(f"cannot downsample {n} pairs to {k}")
    rng = np.random.default_rng(seed)
    return s.take(rng.choice(n, size=k, replace=False))
