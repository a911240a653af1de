"""
Uniform cell-centered grid on [0, L], simulation state, and the generators
for diffusion constants and initial data.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erf

from src.models import (
    DiffusionDescriptor,
    DiffusionFamily,
    InitialDataDescriptor,
    SizeProfile,
    SpatialProfile,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid:
    """M uniform cells of width h = L / M; values are cell averages."""

    length: float = 1.0
    cells: int = 1

    def __post_init__(self):
        if self.cells < 1 or not self.length > 0:
            raise ValueError(f"invalid grid: length={self.length}, cells={self.cells}")

    @property
    def h(self) -> float:
        return self.length / self.cells

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) * self.h


@dataclass(frozen=True, eq=False)
class SimState:
    """
    Concentrations on the size x space grid.

    ``c`` has shape (N, M) with ``c[i-1, m]`` the average of c_i over cell m;
    ``d[i-1]`` is the diffusion constant of size i. ``clip_mass`` is the mass
    of negative values set to zero by the step that produced this state.
    """

    c: np.ndarray
    d: np.ndarray
    t: float
    grid: Grid
    clip_mass: float = 0.0

    @property
    def n(self) -> int:
        return int(self.c.shape[0])

    def evolve(self, c: np.ndarray, dt: float, clip_mass: float = 0.0) -> "SimState":
        return replace(self, c=c, t=self.t + dt, clip_mass=clip_mass)


def diffusion_constants(desc: DiffusionDescriptor, n: int) -> np.ndarray:
    """d_1..d_N from a descriptor; all entries lie in [min d, max d] > 0."""
    sizes = np.arange(1, n + 1, dtype=np.float64)
    if desc.family == DiffusionFamily.CONSTANT:
        d = np.full(n, desc.d)
    elif desc.family == DiffusionFamily.ALTERNATING:
        d = np.where(sizes % 2 == 1, desc.odd, desc.even)
    elif desc.family == DiffusionFamily.POWER:
        d = np.clip(desc.d0 * sizes ** (-desc.exponent), desc.d_min, desc.d_max)
    else:
        values = np.asarray(desc.values, dtype=np.float64)
        d = np.concatenate([values, np.full(max(0, n - len(values)), values[-1])])[:n]
    return d.astype(np.float64)


def size_profile(desc: InitialDataDescriptor, n: int) -> np.ndarray:
    """Size distribution s_1..s_N with sum_i i s_i = desc.mass."""
    sizes = np.arange(1, n + 1, dtype=np.float64)
    if desc.size == SizeProfile.MONODISPERSE or desc.mean <= 1.0:
        s = np.zeros(n)
        s[0] = 1.0
    else:
        q = 1.0 - 1.0 / desc.mean
        s = q ** (sizes - 1.0)
    return desc.mass * s / np.dot(sizes, s)


def spatial_profile(desc: InitialDataDescriptor, grid: Grid) -> np.ndarray:
    """Exact cell averages of the spatial factor, with unit spatial mean."""
    a, b = grid.edges[:-1], grid.edges[1:]
    h, L = grid.h, grid.length

    if desc.spatial == SpatialProfile.CONSTANT:
        return np.ones(grid.cells)

    if desc.spatial == SpatialProfile.COSINE:
        k = desc.mode * np.pi / L
        return 1.0 + desc.amplitude * (np.sin(k * b) - np.sin(k * a)) / (k * h)

    if desc.spatial == SpatialProfile.BUMP:
        scale = desc.sigma * np.sqrt(2.0)
        integral = 0.5 * desc.sigma * np.sqrt(2.0 * np.pi) * (
            erf((b - desc.x0) / scale) - erf((a - desc.x0) / scale)
        )
        f = 1.0 + desc.amplitude * integral / h
    else:
        left = np.clip(desc.x0 - a, 0.0, h)
        f = (desc.low * left + desc.high * (h - left)) / h

    return f / np.mean(f)


def initial_state(
    desc: InitialDataDescriptor, n: int, grid: Grid, d: np.ndarray
) -> SimState:
    """c_i^0(x) = s_i f(x) on the grid; mean mass density equals desc.mass."""
    c0 = np.outer(size_profile(desc, n), spatial_profile(desc, grid))
    if np.any(c0 < 0) or not np.all(np.isfinite(c0)):
        raise ValueError("initial data must be finite and nonnegative")
    logger.debug(
        f"initial data: size={desc.size.value}, spatial={desc.spatial.value}, "
        f"N={n}, M={grid.cells}"
    )
    return SimState(c=c0, d=d, t=0.0, grid=grid)
