"""Conditional congruence error: model sampling, evaluation, rejection sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .calibration import mean_nll
from .distributions import PredictiveDistribution, open_uniforms
from .kernels import KernelSpec, output_bandwidth
from .mcmd import DEFAULT_LAMBDA, ConditionalEmbedding, MCMDConfig, MCMDEstimator, SampleSet


@dataclass(frozen=True)
class ModelPrediction:
    embedding: np.ndarray
    dist: PredictiveDistribution


@dataclass(frozen=True)
class CongruenceReport:
    queries: np.ndarray
    values: np.ndarray
    mean: float


@dataclass(frozen=True)
class RejectSweepResult:
    """Metrics on the subset retained at each threshold.

    ``mae`` and ``nll`` are NaN where nothing is retained.
    """

    thresholds: np.ndarray
    retained_fraction: np.ndarray
    mae: np.ndarray
    nll: np.ndarray


def default_config(ground_truth: SampleSet, lam: float = DEFAULT_LAMBDA,
                   kernel_x: Optional[KernelSpec] = None) -> MCMDConfig:
    """Cubic polynomial input kernel, RBF output kernel with the variance heuristic."""
    if kernel_x is None:
        kernel_x = KernelSpec.polynomial()
    kernel_y = KernelSpec.rbf(output_bandwidth(ground_truth.outputs))
    return MCMDConfig(kernel_x, kernel_y, lam, lam)


def build_model_sample(preds: Sequence[ModelPrediction] | None = None, ell: int = 1, seed=0, *,
                       embeddings=None, dists: Sequence[PredictiveDistribution] | None = None) -> SampleSet:
    """Draw ``ell`` outputs from each predictive distribution.

    Either pass ``preds`` or the aligned ``embeddings`` / ``dists`` pair.
    Embedding ``i`` appears ``ell`` consecutive times, each paired with an
    independent draw from ``dists[i]``.
    """
    if preds is not None:
        embeddings = [p.embedding for p in preds]
        dists = [p.dist for p in preds]
    if dists is None or len(dists) == 0:
        raise ValueError("no predictions to sample from")
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    x = np.asarray(embeddings, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != len(dists):
        raise ValueError(f"{x.shape[0]} embeddings but {len(dists)} distributions")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = open_uniforms(rng, (len(dists), ell))
    ys = np.concatenate([d.quantile(row) for d, row in zip(dists, u)])
    return SampleSet(np.repeat(x, ell, axis=0), ys)


def cce_eval(ground_truth, model_sample: SampleSet, config: MCMDConfig, queries=None) -> CongruenceReport:
    """CCE at each query (default: the ground-truth conditioning points).

    ``ground_truth`` may be a fitted :class:`ConditionalEmbedding` to share
    its inverse across several models.
    """
    if queries is None:
        gt = ground_truth.sample if isinstance(ground_truth, ConditionalEmbedding) else ground_truth
        queries = gt.conditioning
    est = MCMDEstimator(ground_truth, model_sample, config)
    q = est.as_queries(queries)
    values = est.profile(q)
    return CongruenceReport(q, values, float(np.mean(values)))


def point_predictions(dists: Sequence[PredictiveDistribution]) -> np.ndarray:
    """Predictive means, the point estimate used for MAE."""
    return np.array([d.mean() for d in dists])


def reject_sweep(cce_values, point_predictions, dists: Sequence[PredictiveDistribution],
                 labels, thresholds) -> RejectSweepResult:
    """MAE and NLL on ``{i : cce_i <= tau}`` for each threshold ``tau``."""
    cce_values = np.asarray(cce_values, dtype=float).ravel()
    preds = np.asarray(point_predictions, dtype=float).ravel()
    labels = np.asarray(labels, dtype=float).ravel()
    thresholds = np.asarray(thresholds, dtype=float).ravel()
    n = cce_values.size
    if not (preds.size == labels.size == len(dists) == n):
        raise ValueError("cce_values, point_predictions, dists and labels must have equal lengths")
    if n == 0:
        raise ValueError("empty inputs")
    if np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be sorted ascending")
    if np.any(thresholds < 0):
        raise ValueError("thresholds must be nonnegative")

    abs_err = np.abs(preds - labels)
    frac, mae, nlls = [], [], []
    for tau in thresholds:
        keep = np.flatnonzero(cce_values <= tau)
        frac.append(keep.size / n)
        if keep.size == 0:
            mae.append(math.nan)
            nlls.append(math.nan)
            continue
        mae.append(float(abs_err[keep].mean()))
        nlls.append(mean_nll([dists[i] for i in keep], labels[keep]))
    return RejectSweepResult(thresholds, np.array(frac), np.array(mae), np.array(nlls))
