"""Kernel functions, Gram matrices and the output-bandwidth heuristic."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

RBF = "rbf"
LAPLACIAN = "laplacian"
POLYNOMIAL = "polynomial"
FAMILIES = (RBF, LAPLACIAN, POLYNOMIAL)


class DegenerateOutputs(ValueError):
    """Raised when the output bandwidth heuristic sees zero variance."""


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus its hyperparameters.

    ``gamma`` is used by the RBF and Laplacian kernels. ``degree``, ``offset``
    and ``scale`` parameterise the polynomial kernel
    ``(scale * <u, v> + offset) ** degree``; ``scale=None`` means ``1/d``
    where ``d`` is the input dimension, resolved at evaluation time.
    """

    family: str
    gamma: Optional[float] = None
    degree: int = 3
    offset: float = 1.0
    scale: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family in (RBF, LAPLACIAN):
            if self.gamma is None or not self.gamma > 0:
                raise ValueError(f"{self.family} kernel needs gamma > 0, got {self.gamma}")
        else:
            if int(self.degree) != self.degree or self.degree < 1:
                raise ValueError(f"polynomial degree must be a positive integer, got {self.degree}")
            if self.scale is not None and not self.scale > 0:
                raise ValueError(f"polynomial scale must be positive, got {self.scale}")

    @classmethod
    def rbf(cls, gamma: float) -> "KernelSpec":
        return cls(RBF, gamma=float(gamma))

    @classmethod
    def laplacian(cls, gamma: float) -> "KernelSpec":
        return cls(LAPLACIAN, gamma=float(gamma))

    @classmethod
    def polynomial(cls, degree: int = 3, offset: float = 1.0, scale: Optional[float] = None) -> "KernelSpec":
        return cls(POLYNOMIAL, degree=int(degree), offset=float(offset),
                   scale=None if scale is None else float(scale))

    def resolved_scale(self, dim: int) -> float:
        return 1.0 / dim if self.scale is None else self.scale

    def describe(self) -> str:
        if self.family == POLYNOMIAL:
            scale = "1/d" if self.scale is None else repr(self.scale)
            return f"polynomial(degree={self.degree}, offset={self.offset!r}, scale={scale})"
        return f"{self.family}(gamma={self.gamma!r})"


@dataclass(frozen=True)
class GramMatrix:
    """Pairwise kernel evaluations; ``symmetric`` is set for self-Gram matrices."""

    entries: np.ndarray
    symmetric: bool

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    @property
    def shape(self):
        return self.entries.shape


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"expected a list of vectors, got array of shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("empty point set")
    if arr.shape[1] == 0:
        raise ValueError("points must have dimension >= 1")
    return arr


def _pairwise(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if spec.family == RBF:
        # explicit differences rather than the |a|^2 + |b|^2 - 2ab expansion:
        # zero distance must give exactly 1
        diff = a[:, None, :] - b[None, :, :]
        return np.exp(-spec.gamma * np.einsum("ijk,ijk->ij", diff, diff))
    if spec.family == LAPLACIAN:
        return np.exp(-spec.gamma * np.abs(a[:, None, :] - b[None, :, :]).sum(axis=2))
    scale = spec.resolved_scale(a.shape[1])
    return (scale * (a @ b.T) + spec.offset) ** spec.degree


def _pairwise_chunked(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if spec.family == POLYNOMIAL:
        return _pairwise(spec, a, b)
    # bound the (rows, m, d) difference tensor to roughly 16M floats
    step = max(1, int(2**24 // max(1, b.shape[0] * a.shape[1])))
    if step >= a.shape[0]:
        return _pairwise(spec, a, b)
    out = np.empty((a.shape[0], b.shape[0]))
    for start in range(0, a.shape[0], step):
        out[start:start + step] = _pairwise(spec, a[start:start + step], b)
    return out


def kernel_eval(spec: KernelSpec, u, v) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape or u.size == 0:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(_pairwise(spec, u[None, :], v[None, :])[0, 0])


def gram(spec: KernelSpec, points) -> GramMatrix:
    """Symmetric Gram matrix of ``points`` against themselves.

    The upper triangle is mirrored onto the lower one so that the result is
    bitwise symmetric, which the Cholesky path downstream relies on.
    """
    x = _as_points(points)
    k = _pairwise_chunked(spec, x, x)
    upper = np.triu(k)
    k = upper + np.triu(k, 1).T
    return GramMatrix(k, symmetric=True)


def cross_gram(spec: KernelSpec, a, b) -> GramMatrix:
    """Matrix with entries ``k(a[i], b[j])``."""
    a = _as_points(a)
    b = _as_points(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return GramMatrix(_pairwise_chunked(spec, a, b), symmetric=False)


def output_bandwidth(ys) -> float:
    """RBF bandwidth ``1 / (2 s^2)`` from the unbiased sample variance of ``ys``."""
    ys = np.asarray(ys, dtype=float).ravel()
    if ys.size < 2:
        raise ValueError("output_bandwidth needs at least two values")
    s2 = np.var(ys, ddof=1)
    if not s2 > 0:
        raise DegenerateOutputs("all outputs are identical; the bandwidth heuristic is undefined")
    return float(1.0 / (2.0 * s2))
