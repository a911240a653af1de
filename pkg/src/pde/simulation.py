"""
Run driver: builds the state from a SimConfig and advances it with Strang
splitting while a TrajectoryRecorder collects samples.
"""

import logging
import time
from typing import Optional

import numpy as np

from src.kernels.validation import KernelSet
from src.models import SimConfig
from src.pde.grid import Grid, diffusion_constants, initial_state
from src.pde.integrator import (
    NonFiniteStateError,
    ReactionIntegrator,
    StiffnessError,
    strang_step,
)
from src.pde.trajectory import Trajectory, TrajectoryRecorder
from src.rhs.reaction import ReactionSystem

logger = logging.getLogger(__name__)


class Simulation:
    """
    One configured run of the truncated reaction-diffusion system.

    Args:
        cfg: Validated simulation configuration
        kernels: Coefficients to use instead of the ones described in ``cfg``
        lp_exponent: p of the running space-time L^p integrals of tracked sizes
    """

    def __init__(
        self,
        cfg: SimConfig,
        kernels: Optional[KernelSet] = None,
        lp_exponent: float = 3.0,
    ):
        self.cfg = cfg
        self.kernels = kernels or KernelSet.from_config(cfg)
        self.lp_exponent = lp_exponent
        self.grid = Grid(length=cfg.grid.length, cells=cfg.grid.cells)
        self.d = diffusion_constants(cfg.diffusion, cfg.n)
        self.system = ReactionSystem(
            self.kernels.coag,
            self.kernels.frag,
            cfg.n,
            cfg.truncation,
            self.kernels.collision,
        )
        self.integrator = ReactionIntegrator(
            self.system, cfg.tracked_sizes, self.grid.h
        )

    def run(self) -> Trajectory:
        """
        Advance to ``t_final``, sampling every ``sample_stride`` steps and at the end.

        Raises:
            StiffnessError: If a reaction step cannot satisfy the positivity guard
            NonFiniteStateError: If the state becomes NaN or Inf
        Both carry the trajectory recorded so far in ``.trajectory``.
        """
        cfg = self.cfg
        n_steps = cfg.time.n_steps
        dt = cfg.time.t_final / n_steps
        stride = cfg.time.sample_stride
        scheme = cfg.time.diffusion_scheme

        state = initial_state(cfg.initial, cfg.n, self.grid, self.d)
        recorder = TrajectoryRecorder(
            config=cfg,
            grid=self.grid,
            d=self.d,
            tracked_sizes=list(cfg.tracked_sizes),
            lp_exponent=self.lp_exponent,
            keep_snapshots=cfg.time.keep_snapshots,
        )
        recorder.start(state.c)

        logger.info(
            f"📥 run: model={cfg.model.value}, N={cfg.n}, M={self.grid.cells}, "
            f"steps={n_steps}, dt={dt:g}"
        )
        started = time.perf_counter()
        max_substeps = 1
        for step in range(1, n_steps + 1):
            t = step * dt
            try:
                state, reacted = strang_step(state, self.integrator, dt, scheme)
            except StiffnessError as e:
                e.step, e.t = step, t - dt
                e.trajectory = recorder.finish(complete=False)
                logger.error(f"❌ step {step} (t={t - dt:g}): {e}")
                raise
            if not np.all(np.isfinite(state.c)):
                error = NonFiniteStateError(
                    f"non-finite concentration at step {step} (t={t:g})", step, t
                )
                error.trajectory = recorder.finish(complete=False)
                logger.error(f"❌ {error}")
                raise error

            max_substeps = max(max_substeps, reacted.substeps)
            recorder.advance(
                dt, state.c, reacted.leaked, reacted.integrals, reacted.clip_mass
            )
            if step % stride == 0 or step == n_steps:
                recorder.sample(t, state.c)

        trajectory = recorder.finish()
        logger.info(
            f"✅ run finished in {time.perf_counter() - started:.2f}s: "
            f"{len(trajectory.times)} samples, max sub-steps {max_substeps}, "
            f"mass {trajectory.mass[0]:.6g} -> {trajectory.mass[-1]:.6g}"
        )
        return trajectory


def run(
    cfg: SimConfig,
    kernels: Optional[KernelSet] = None,
    lp_exponent: float = 3.0,
) -> Trajectory:
    """Build a Simulation from ``cfg`` and run it."""
    return Simulation(cfg, kernels=kernels, lp_exponent=lp_exponent).run()
