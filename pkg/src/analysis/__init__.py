"""
Post-processing of trajectories: moment series, a-priori bounds, gelation
scans and the tightness diagnostic.
"""

from src.analysis.bounds import (
    coag_gain_constant,
    duality_report,
    frag_gain_constant,
    l1_terms_report,
    regularity_report,
    rho_l2_space_time,
)
from src.analysis.gelation import gelation_scan, gelation_verdict
from src.analysis.moments import (
    MomentSeries,
    UntrackedSizeError,
    mass,
    mass_conservation_report,
    moment_series,
)
from src.analysis.superlinear import (
    lambda_for,
    lambda_from_initial,
    log_moment_report,
    log_psi,
    psi_for_trajectory,
    superlinear_report,
    superlinear_series,
)
from src.analysis.tightness import TightnessResult, phi_k, tightness_diagnostic

__all__ = [
    "MomentSeries",
    "TightnessResult",
    "UntrackedSizeError",
    "coag_gain_constant",
    "duality_report",
    "frag_gain_constant",
    "gelation_scan",
    "gelation_verdict",
    "l1_terms_report",
    "lambda_for",
    "lambda_from_initial",
    "log_moment_report",
    "log_psi",
    "mass",
    "mass_conservation_report",
    "moment_series",
    "phi_k",
    "psi_for_trajectory",
    "regularity_report",
    "rho_l2_space_time",
    "superlinear_report",
    "superlinear_series",
    "tightness_diagnostic",
]
