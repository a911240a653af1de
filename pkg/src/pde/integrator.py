"""
Reaction sub-stepping and Strang splitting.

The reaction integrator advances an augmented state per cell: the N
concentrations, the mass leaked past the truncation, and the time
integrals of the gain/loss terms of each tracked size. Integrating those
alongside c makes the integrated-equation identities hold to rounding.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from src.models import DiffusionScheme
from src.pde.diffusion import diffusion_step
from src.pde.grid import SimState
from src.rhs.reaction import ReactionSystem
from src.settings import MAX_HALVINGS, POSITIVITY_TOL

logger = logging.getLogger(__name__)

TERM_NAMES = (
    "coag_gain",
    "coag_loss",
    "frag_gain",
    "frag_loss",
    "coll_gain",
    "coll_loss",
)


class StiffnessError(Exception):
    """Exception raised when a reaction step needs over 2^MAX_HALVINGS sub-steps."""

    def __init__(self, message: str, step: Optional[int] = None, t: float = 0.0):
        super().__init__(message)
        self.step = step
        self.t = t
        self.trajectory = None


class NonFiniteStateError(Exception):
    """Exception raised when the state picks up NaN or Inf."""

    def __init__(self, message: str, step: Optional[int] = None, t: float = 0.0):
        super().__init__(message)
        self.step = step
        self.t = t
        self.trajectory = None


@dataclass
class ReactionResult:
    """Outcome of one reaction step over dt, per cell."""

    c: np.ndarray  # (N, M)
    leaked: np.ndarray  # (M,)
    integrals: np.ndarray  # (len(TERM_NAMES) * K, M)
    clip_mass: float
    substeps: int


class ReactionIntegrator:
    """
    Explicit RK4 on dc/dt = R(c) with step halving.

    A step of size dt is retried with 2, 4, ... 2^MAX_HALVINGS sub-steps
    until no concentration falls below -POSITIVITY_TOL * scale. Surviving
    small negatives are clipped to zero and the clipped mass is accumulated.

    Args:
        system: Precomputed reaction system
        tracked_sizes: Sizes whose gain/loss integrals are carried along
        h: Cell width, for clip-mass bookkeeping
    """

    def __init__(self, system: ReactionSystem, tracked_sizes: Sequence[int], h: float):
        self.system = system
        self.tracked = np.asarray(list(tracked_sizes), dtype=np.int64) - 1
        self.n = system.n
        self.h = h
        self.n_terms = len(TERM_NAMES) * len(self.tracked)
        self.sizes = np.arange(1, self.n + 1, dtype=np.float64)

    def derivative(self, Y: np.ndarray) -> np.ndarray:
        n = self.n
        c = Y[:n]
        terms = self.system.terms(c)
        out = np.empty_like(Y)
        out[:n] = terms.net
        out[n] = terms.leak
        coll = terms.coll
        zero = np.zeros_like(c)
        parts = (
            terms.coag.gain,
            terms.coag.loss,
            terms.frag.gain,
            terms.frag.loss,
            coll.gain if coll is not None else zero,
            coll.loss if coll is not None else zero,
        )
        K = len(self.tracked)
        for slot, part in enumerate(parts):
            out[n + 1 + slot * K : n + 1 + (slot + 1) * K] = part[self.tracked]
        return out

    def _rk4(self, Y: np.ndarray, dt: float) -> np.ndarray:
        k1 = self.derivative(Y)
        k2 = self.derivative(Y + 0.5 * dt * k1)
        k3 = self.derivative(Y + 0.5 * dt * k2)
        k4 = self.derivative(Y + dt * k3)
        return Y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def step(self, c: np.ndarray, dt: float) -> ReactionResult:
        """
        Integrate the reactions over ``dt`` for every cell.

        Raises:
            StiffnessError: If 2^MAX_HALVINGS sub-steps still fail the guard
        """
        n, M = c.shape
        Y0 = np.zeros((n + 1 + self.n_terms, M))
        Y0[:n] = c
        scale = max(float(np.max(np.abs(c))), np.finfo(float).tiny)
        floor = -POSITIVITY_TOL * scale

        for halvings in range(MAX_HALVINGS + 1):
            substeps = 2**halvings
            h = dt / substeps
            Y = Y0
            clip_mass = 0.0
            ok = True
            for _ in range(substeps):
                Y = self._rk4(Y, h)
                conc = Y[:n]
                if not np.all(np.isfinite(Y)) or float(conc.min()) < floor:
                    ok = False
                    break
                negative = conc < 0
                if np.any(negative):
                    weights = np.broadcast_to(self.sizes[:, None], conc.shape)
                    clipped = np.sum(weights[negative] * conc[negative])
                    clip_mass += -float(clipped) * self.h
                    conc[negative] = 0.0
            if ok:
                if halvings:
                    logger.debug(f"reaction step needed {substeps} sub-steps")
                if clip_mass > 0:
                    logger.warning(
                        f"⚠️ clipped negative concentrations, mass {clip_mass:.3e}"
                    )
                return ReactionResult(
                    c=Y[:n],
                    leaked=Y[n],
                    integrals=Y[n + 1 :],
                    clip_mass=clip_mass,
                    substeps=substeps,
                )

        raise StiffnessError(
            f"reaction step of dt={dt:g} failed the positivity guard with "
            f"{2**MAX_HALVINGS} sub-steps"
        )


def strang_step(
    state: SimState,
    integrator: ReactionIntegrator,
    dt: float,
    scheme: DiffusionScheme = DiffusionScheme.IMPLICIT_EULER,
) -> tuple[SimState, ReactionResult]:
    """
    Half diffusion, full reaction, half diffusion.

    Returns:
        The new state at t + dt and the step bookkeeping; its ``clip_mass``
        covers both diffusion halves and the reaction step
    """
    half = diffusion_step(state, 0.5 * dt, scheme)
    reacted = integrator.step(half.c, dt)
    mid = SimState(c=reacted.c, d=half.d, t=half.t, grid=half.grid)
    out = diffusion_step(mid, 0.5 * dt, scheme)
    clipped = half.clip_mass + reacted.clip_mass + out.clip_mass
    return out, replace(reacted, clip_mass=clipped)
