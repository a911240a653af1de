"""Sampled simulation output and the recorder that builds it."""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.models import SimConfig
from src.pde.grid import Grid
from src.pde.integrator import TERM_NAMES
from src.summation import KahanAccumulator, exact_sum, pairwise_sum

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    """
    Time samples of a run.

    Per sample ``k``: ``mass[k] = int rho``, ``size_integrals[k, i-1] = int c_i``
    (every moment is a weighted sum of these), ``rho_l2[k] = ||rho||_{L2}``,
    cumulative ``leaked`` and ``clip_mass``, the running space-time integrals
    ``rho_l1_st`` and ``rho_l2sq_st`` and, for each tracked size and term in
    TERM_NAMES, ``term_integrals[name][k, slot]``.
    """

    config: SimConfig
    grid: Grid
    d: np.ndarray
    tracked_sizes: list[int]
    lp_exponent: float
    c0: np.ndarray
    times: np.ndarray
    mass: np.ndarray
    size_integrals: np.ndarray
    rho_l2: np.ndarray
    leaked: np.ndarray
    clip_mass: np.ndarray
    rho_l1_st: np.ndarray
    rho_l2sq_st: np.ndarray
    m_eff_min: np.ndarray
    m_eff_max: np.ndarray
    term_integrals: dict[str, np.ndarray]
    lp_integrals: np.ndarray  # (K,) int int |c_i|^p at the last sample
    sup_norms: np.ndarray  # (K,) sup |c_i| up to the last sample
    final: np.ndarray
    snapshots: Optional[np.ndarray] = None
    complete: bool = True

    @property
    def n(self) -> int:
        return int(self.c0.shape[0])

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def slot(self, size: int) -> int:
        """Column of ``size`` in the tracked arrays."""
        return self.tracked_sizes.index(size)

    def moment(self, weights: np.ndarray) -> np.ndarray:
        """int sum_i weights_i c_i at every sample (``weights[i-1]``)."""
        w = np.asarray(weights, dtype=np.float64)[: self.n]
        return np.array([exact_sum(w * row) for row in self.size_integrals])


@dataclass
class TrajectoryRecorder:
    """Accumulates samples and running integrals while a run advances."""

    config: SimConfig
    grid: Grid
    d: np.ndarray
    tracked_sizes: list[int]
    lp_exponent: float = 3.0
    keep_snapshots: bool = False

    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    size_integrals: list = field(default_factory=list)
    rho_l2: list = field(default_factory=list)
    leaked: list = field(default_factory=list)
    clip_mass: list = field(default_factory=list)
    rho_l1_st: list = field(default_factory=list)
    rho_l2sq_st: list = field(default_factory=list)
    m_eff_min: list = field(default_factory=list)
    m_eff_max: list = field(default_factory=list)
    term_rows: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def __post_init__(self):
        n = self.d.shape[0]
        self.sizes = np.arange(1, n + 1, dtype=np.float64)
        self.tracked = np.asarray(self.tracked_sizes, dtype=np.int64) - 1
        K = len(self.tracked_sizes)
        self._rho_l1 = KahanAccumulator()
        self._rho_l2sq = KahanAccumulator()
        self._lp = KahanAccumulator((K,))
        self._sup = np.zeros(K)
        self._leaked = KahanAccumulator()
        self._clip = 0.0
        self._terms = KahanAccumulator((len(TERM_NAMES) * K,))
        self._prev = None
        self.c0 = None
        self.last = None

    def _spatial(self, c: np.ndarray) -> dict:
        h = self.grid.h
        rho = pairwise_sum(self.sizes[:, None] * c, axis=0)
        tracked = np.abs(c[self.tracked])
        return {
            "rho_l1": h * float(pairwise_sum(rho)),
            "rho_l2sq": h * float(pairwise_sum(rho * rho)),
            "lp": h * pairwise_sum(tracked**self.lp_exponent, axis=-1),
            "sup": tracked.max(axis=-1) if tracked.size else np.zeros(0),
            "rho": rho,
        }

    def start(self, c0: np.ndarray) -> None:
        self.c0 = c0.copy()
        self.last = c0
        self._prev = self._spatial(c0)
        self._sup = np.maximum(self._sup, self._prev["sup"])
        self.sample(0.0, c0)

    def advance(
        self,
        dt: float,
        c: np.ndarray,
        leaked: np.ndarray,
        integrals: np.ndarray,
        clip_mass: float,
    ) -> None:
        """Fold one completed step into the running integrals."""
        h = self.grid.h
        cur = self._spatial(c)
        prev = self._prev
        self._rho_l1.add(0.5 * dt * (prev["rho_l1"] + cur["rho_l1"]))
        self._rho_l2sq.add(0.5 * dt * (prev["rho_l2sq"] + cur["rho_l2sq"]))
        self._lp.add(0.5 * dt * (prev["lp"] + cur["lp"]))
        self._sup = np.maximum(self._sup, cur["sup"])
        self._leaked.add(h * float(pairwise_sum(leaked)))
        self._terms.add(h * pairwise_sum(integrals, axis=-1))
        self._clip += clip_mass
        self._prev = cur
        self.last = c

    def sample(self, t: float, c: np.ndarray) -> None:
        h = self.grid.h
        spatial = self._prev
        rho = spatial["rho"]
        self.times.append(t)
        self.mass.append(h * exact_sum(self.sizes[:, None] * c))
        self.size_integrals.append(h * pairwise_sum(c, axis=-1))
        self.rho_l2.append(float(np.sqrt(spatial["rho_l2sq"])))
        self.leaked.append(float(self._leaked))
        self.clip_mass.append(self._clip)
        self.rho_l1_st.append(float(self._rho_l1))
        self.rho_l2sq_st.append(float(self._rho_l2sq))
        flux = pairwise_sum(self.d[:, None] * self.sizes[:, None] * c, axis=0)
        occupied = rho > 0
        if np.any(occupied):
            m_eff = flux[occupied] / rho[occupied]
            self.m_eff_min.append(float(m_eff.min()))
            self.m_eff_max.append(float(m_eff.max()))
        else:
            self.m_eff_min.append(float(self.d.min()))
            self.m_eff_max.append(float(self.d.max()))
        self.term_rows.append(self._terms.value)
        if self.keep_snapshots:
            self.snapshots.append(c.copy())

    def finish(self, complete: bool = True) -> Trajectory:
        K = len(self.tracked_sizes)
        rows = np.array(self.term_rows).reshape(len(self.times), len(TERM_NAMES), K)
        term_integrals = {
            name: rows[:, slot, :] for slot, name in enumerate(TERM_NAMES)
        }
        return Trajectory(
            config=self.config,
            grid=self.grid,
            d=self.d,
            tracked_sizes=list(self.tracked_sizes),
            lp_exponent=self.lp_exponent,
            c0=self.c0,
            times=np.array(self.times),
            mass=np.array(self.mass),
            size_integrals=np.array(self.size_integrals),
            rho_l2=np.array(self.rho_l2),
            leaked=np.array(self.leaked),
            clip_mass=np.array(self.clip_mass),
            rho_l1_st=np.array(self.rho_l1_st),
            rho_l2sq_st=np.array(self.rho_l2sq_st),
            m_eff_min=np.array(self.m_eff_min),
            m_eff_max=np.array(self.m_eff_max),
            term_integrals=term_integrals,
            lp_integrals=self._lp.value,
            sup_norms=self._sup.copy(),
            final=self.last.copy(),
            snapshots=np.array(self.snapshots) if self.keep_snapshots else None,
            complete=complete,
        )
