"""
Constructive weight sequences (xi, psi, lambda) and their growth checks.
"""

from src.sequences.estimates import empirical_psi_constant, psi_case_bounds
from src.sequences.weights import (
    SequenceDataError,
    SequenceKind,
    SequenceRangeError,
    WeightSequence,
    build_lambda,
    build_psi,
    build_xi,
    closed_form_lambda,
    nondecreasing_minorant,
    psi_mu,
)

__all__ = [
    "SequenceDataError",
    "SequenceKind",
    "SequenceRangeError",
    "WeightSequence",
    "build_lambda",
    "build_psi",
    "build_xi",
    "closed_form_lambda",
    "empirical_psi_constant",
    "nondecreasing_minorant",
    "psi_case_bounds",
    "psi_mu",
]
