"""
Spatially resolved solver: Neumann diffusion per species, RK4 reactions and
Strang splitting, with sampled trajectories.
"""

from src.pde.diffusion import diffusion_step, neumann_laplacian_apply
from src.pde.grid import (
    Grid,
    SimState,
    diffusion_constants,
    initial_state,
    size_profile,
    spatial_profile,
)
from src.pde.integrator import (
    TERM_NAMES,
    NonFiniteStateError,
    ReactionIntegrator,
    ReactionResult,
    StiffnessError,
    strang_step,
)
from src.pde.simulation import Simulation, run
from src.pde.trajectory import Trajectory, TrajectoryRecorder

__all__ = [
    "Grid",
    "NonFiniteStateError",
    "ReactionIntegrator",
    "ReactionResult",
    "SimState",
    "Simulation",
    "StiffnessError",
    "TERM_NAMES",
    "Trajectory",
    "TrajectoryRecorder",
    "diffusion_constants",
    "diffusion_step",
    "initial_state",
    "neumann_laplacian_apply",
    "run",
    "size_profile",
    "spatial_profile",
    "strang_step",
]
