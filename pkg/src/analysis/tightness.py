"""Tightness diagnostic: moments with the cut-off weights phi_k."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.analysis.moments import MomentSeries, moment_series
from src.pde.trajectory import Trajectory

logger = logging.getLogger(__name__)


@dataclass
class TightnessResult:
    series: dict[int, MomentSeries]
    deviations: dict[int, float]
    decreasing: bool

    def summary(self) -> dict:
        return {
            "k": list(self.series),
            "max_deviation": {str(k): v for k, v in self.deviations.items()},
            "decreasing": self.decreasing,
        }


def phi_k(k: int, n: int) -> np.ndarray:
    """phi_k(i) = log i / log k for i < k, else 1; sizes 1..n."""
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    sizes = np.arange(1, n + 1, dtype=np.float64)
    return np.where(sizes < k, np.log(sizes) / np.log(k), 1.0)


def tightness_diagnostic(traj: Trajectory, ks: Sequence[int]) -> TightnessResult:
    """
    G_k(t) = int sum_i i phi_k(i) c_i for each k.

    ``decreasing`` reports whether sup_t |G_k(t) - G_k(0)| is nonincreasing
    as k grows.
    """
    ks = sorted(ks)
    sizes = np.arange(1, traj.n + 1, dtype=np.float64)
    series, deviations = {}, {}
    for k in ks:
        s = moment_series(traj, sizes * phi_k(k, traj.n), name=f"tightness_k{k}")
        series[k] = s
        deviations[k] = s.max_deviation()
    values = [deviations[k] for k in ks]
    decreasing = all(b <= a for a, b in zip(values, values[1:]))
    logger.info(
        f"🔎 tightness: "
        + ", ".join(f"k={k}: {v:.4g}" for k, v in deviations.items())
        + f" (decreasing={decreasing})"
    )
    return TightnessResult(series=series, deviations=deviations, decreasing=decreasing)
