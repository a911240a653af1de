"""Moment series extracted from trajectories."""

import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from src.models import BoundReport
from src.pde.trajectory import Trajectory
from src.sequences.weights import WeightSequence

logger = logging.getLogger(__name__)


class UntrackedSizeError(Exception):
    """Exception raised when a report asks for a size the run did not track."""

    pass


@dataclass(frozen=True, eq=False)
class MomentSeries:
    """int sum_i phi_i c_i at each sample time for a named weight phi."""

    name: str
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError(f"{self.name}: sample times must be strictly increasing")

    @property
    def initial(self) -> float:
        return float(self.values[0])

    @property
    def final(self) -> float:
        return float(self.values[-1])

    def max_deviation(self) -> float:
        """sup_t |G(t) - G(0)| over the samples."""
        return float(np.max(np.abs(self.values - self.values[0])))


Weights = Union[np.ndarray, WeightSequence]


def _weights(traj: Trajectory, phi: Weights) -> np.ndarray:
    if isinstance(phi, WeightSequence):
        return phi.head(traj.n)
    w = np.asarray(phi, dtype=np.float64)
    if w.shape[0] < traj.n:
        raise ValueError(f"weights cover {w.shape[0]} sizes, run has {traj.n}")
    return w[: traj.n]


def moment_series(traj: Trajectory, phi: Weights, name: str = "moment") -> MomentSeries:
    """Series of int sum_i phi_i c_i; ``phi[i-1]`` or a WeightSequence."""
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    return MomentSeries(
        name=name, times=traj.times.copy(), values=traj.moment(_weights(traj, phi))
    )


def mass(traj: Trajectory) -> MomentSeries:
    """
    Total mass int rho at every sample.

    Uses the exact per-sample quadrature sum_m h sum_i i c_i(t, x_m).
    """
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    return MomentSeries(name="mass", times=traj.times.copy(), values=traj.mass.copy())


def mass_conservation_report(
    traj: Trajectory, tolerance: float = 1.0e-8
) -> BoundReport:
    """
    max_t |m(t) - m(0)| / m(0) against ``tolerance``.

    With zero initial mass the drift is absolute instead of relative.
    """
    series = mass(traj)
    m0 = series.initial
    relative = m0 > 0.0
    if not relative:
        logger.warning("⚠️ zero initial mass; reporting the absolute drift")
    scale = m0 if relative else 1.0
    drift = series.max_deviation() / scale
    accounted = traj.mass + traj.leaked
    report = BoundReport.evaluate(
        formula=(
            "max_t |int rho(t) - int rho(0)| / int rho(0) <= tol"
            if relative
            else "max_t |int rho(t) - int rho(0)| <= tol"
        ),
        measured=drift,
        bound=tolerance,
        details={
            "initial_mass": m0,
            "final_mass": series.final,
            "relative": relative,
            "leaked": float(traj.leaked[-1]),
            "clipped": float(traj.clip_mass[-1]),
            "accounted_drift": float(np.max(np.abs(accounted - m0)) / scale),
            "truncation": traj.config.truncation.value,
        },
    )
    logger.info(
        f"📈 mass drift {drift:.3e} (tol {tolerance:g}): {report.status.value}"
    )
    return report
