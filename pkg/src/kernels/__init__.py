"""
Coagulation, fragmentation and collision coefficient families.
"""

from src.kernels.coagulation import (
    FAMILY_FORMULAS,
    CoagKernel,
    KernelIndexError,
    KernelTableError,
    coag_rate,
    load_kernel_table,
)
from src.kernels.collision import CollisionFragSpec, uniform_mass_daughters
from src.kernels.fragmentation import FragSpec, load_frag_table
from src.kernels.theta import ThetaProfile
from src.kernels.validation import (
    KernelSet,
    check_theta_domination,
    sublinearity_trend,
    validate_structure,
)

__all__ = [
    "FAMILY_FORMULAS",
    "CoagKernel",
    "CollisionFragSpec",
    "FragSpec",
    "KernelIndexError",
    "KernelSet",
    "KernelTableError",
    "ThetaProfile",
    "check_theta_domination",
    "coag_rate",
    "load_frag_table",
    "load_kernel_table",
    "sublinearity_trend",
    "uniform_mass_daughters",
    "validate_structure",
]
