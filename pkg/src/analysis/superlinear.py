"""Propagation of superlinear moments sum_i i psi_i c_i along a run."""

import logging
from typing import Optional

import numpy as np

from src.analysis.moments import MomentSeries, moment_series
from src.kernels.coagulation import CoagKernel
from src.kernels.theta import ThetaProfile
from src.models import BoundReport, LambdaDescriptor, LambdaSource
from src.pde.trajectory import Trajectory
from src.sequences.estimates import empirical_psi_constant
from src.sequences.weights import (
    SequenceKind,
    WeightSequence,
    build_lambda,
    build_psi,
    closed_form_lambda,
)

logger = logging.getLogger(__name__)

LOG_MOMENT_CONSTANT = 2.0


def lambda_from_initial(traj: Trajectory, n: Optional[int] = None) -> WeightSequence:
    """
    lambda built from r_i = int i c_i^0 of the run's initial data.

    ``n`` may exceed the run's N; r is zero past N.
    """
    n = n or traj.n
    sizes = np.arange(1, traj.n + 1, dtype=np.float64)
    r = np.zeros(n)
    m = min(n, traj.n)
    r[:m] = (sizes * traj.size_integrals[0])[:m]
    return build_lambda(r, n)


def lambda_for(desc: LambdaDescriptor, n: int, traj: Optional[Trajectory] = None):
    """Resolve a lambda descriptor; ``initial_data`` needs a trajectory."""
    if desc.source == LambdaSource.INITIAL_DATA:
        if traj is None:
            raise ValueError("lambda from initial data needs a simulation run")
        return lambda_from_initial(traj, n)
    return closed_form_lambda(desc.source.value, n)


def superlinear_weights(psi: WeightSequence, n: int) -> np.ndarray:
    """i psi_i for sizes 1..n."""
    return np.arange(1, n + 1, dtype=np.float64) * psi.head(n)


def superlinear_series(traj: Trajectory, psi: WeightSequence) -> MomentSeries:
    return moment_series(traj, superlinear_weights(psi, traj.n), name="superlinear")


def superlinear_report(
    traj: Trajectory, psi: WeightSequence, constant: float
) -> BoundReport:
    """
    int sum_i i psi_i c_i(T) <= int sum_i i psi_i c_i^0 + C int int rho^2.

    Args:
        traj: Completed run
        psi: Weights defined up to at least the run's N
        constant: C, typically ``empirical_psi_constant(...).details["C_emp"]``
    """
    series = superlinear_series(traj, psi)
    rho_l2sq = float(traj.rho_l2sq_st[-1])
    report = BoundReport.evaluate(
        formula="int sum i psi_i c_i(T) <= int sum i psi_i c_i^0 + C int int rho^2",
        measured=series.final,
        bound=series.initial + constant * rho_l2sq,
        details={
            "C": constant,
            "moment_initial": series.initial,
            "moment_final": series.final,
            "moment_max": float(series.values.max()),
            "rho_l2sq_space_time": rho_l2sq,
            "psi": psi.provenance.get("theta", psi.kind.value),
        },
    )
    logger.info(
        f"📈 superlinear moment {series.initial:.6g} -> {series.final:.6g}, "
        f"bound {report.bound:.6g}: {report.status.value}"
    )
    return report


def log_psi(n: int) -> WeightSequence:
    """psi_i = log i."""
    return WeightSequence.from_values(
        SequenceKind.PSI,
        np.log(np.arange(1, n + 1, dtype=np.float64)),
        {"theta": "log", "n": n},
    )


def log_moment_report(
    traj: Trajectory, constant: float = LOG_MOMENT_CONSTANT
) -> BoundReport:
    """The superlinear bound with psi_i = log i and a fixed constant (default 2)."""
    report = superlinear_report(traj, log_psi(traj.n), constant)
    report.formula = (
        "int sum i log(i) c_i(T) <= int sum i log(i) c_i^0 + C int int rho^2"
    )
    return report


def psi_for_trajectory(
    traj: Trajectory,
    kernel: CoagKernel,
    theta: ThetaProfile,
    lam: LambdaDescriptor,
    probe_range: Optional[int] = None,
) -> tuple[WeightSequence, BoundReport]:
    """
    Build psi for a run and the empirical constant over it.

    psi is built up to max(N, 2R) so the constant can be probed on
    1 <= i, j <= R; R defaults to N.
    """
    R = probe_range or traj.n
    length = max(traj.n, 2 * R)
    psi = build_psi(theta, lambda_for(lam, 2 * length, traj), length)
    constant = empirical_psi_constant(kernel, psi, R)
    return psi, constant
