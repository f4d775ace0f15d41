"""PIT-based calibration baselines: quantile ECE, reliability curves, NLL."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import PredictiveDistribution, nll

DEFAULT_LEVELS = 99
DEFAULT_ALPHA = 1.0


@dataclass(frozen=True)
class CalibrationReport:
    pit: np.ndarray
    levels: np.ndarray
    empirical: np.ndarray
    weights: np.ndarray
    alpha: float
    ece: float
    mean_nll: float

    def summary(self) -> dict:
        return {"ece": self.ece, "mean_nll": self.mean_nll, "alpha": self.alpha,
                "q": int(self.levels.size), "n": int(self.pit.size)}


def _check_lengths(dists, ys):
    if len(dists) != len(ys):
        raise ValueError(f"{len(dists)} distributions but {len(ys)} labels")
    if len(dists) == 0:
        raise ValueError("no predictions")


def pit_values(dists: Sequence[PredictiveDistribution], ys) -> np.ndarray:
    """Probability integral transform ``F_i(y_i)`` for every prediction."""
    ys = np.asarray(ys, dtype=float).ravel()
    _check_lengths(dists, ys)
    return np.array([d.cdf(y) for d, y in zip(dists, ys)])


def confidence_levels(q: int) -> np.ndarray:
    """Interior level grid ``j / (q + 1)``, ``j = 1..q``."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return np.arange(1, q + 1) / (q + 1)


def reliability_curve(pit, q: int = DEFAULT_LEVELS) -> np.ndarray:
    """(level, empirical coverage) pairs, shape (q, 2).

    Empirical coverage at level ``p`` is the fraction of PIT values ``<= p``.
    """
    pit = np.asarray(pit, dtype=float).ravel()
    if pit.size == 0:
        raise ValueError("empty PIT array")
    levels = confidence_levels(q)
    empirical = np.searchsorted(np.sort(pit), levels, side="right") / pit.size
    return np.column_stack([levels, empirical])


def ece(pit, q: int = DEFAULT_LEVELS, alpha: float = DEFAULT_ALPHA) -> float:
    """Uniformly weighted ``sum_j w_j |p_j - phat_j|^alpha`` over the level grid."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    curve = reliability_curve(pit, q)
    return float(np.mean(np.abs(curve[:, 0] - curve[:, 1]) ** alpha))


def mean_nll(dists: Sequence[PredictiveDistribution], ys) -> float:
    """Average negative log likelihood; ``inf`` if any label has zero density."""
    ys = np.asarray(ys, dtype=float).ravel()
    _check_lengths(dists, ys)
    values = [nll(d, y) for d, y in zip(dists, ys)]
    if any(math.isinf(v) for v in values):
        return math.inf
    return float(np.mean(values))


def calibration_report(dists: Sequence[PredictiveDistribution], ys,
                       q: int = DEFAULT_LEVELS, alpha: float = DEFAULT_ALPHA) -> CalibrationReport:
    pit = pit_values(dists, ys)
    curve = reliability_curve(pit, q)
    return CalibrationReport(
        pit=pit,
        levels=curve[:, 0],
        empirical=curve[:, 1],
        weights=np.full(q, 1.0 / q),
        alpha=float(alpha),
        ece=ece(pit, q, alpha),
        mean_nll=mean_nll(dists, ys),
    )
