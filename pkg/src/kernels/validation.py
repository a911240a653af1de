"""
Structural checks on coefficient sets.

Hypothesis violations are returned as data (ValidationReport, TrendReport,
BoundReport); nothing here raises on a bad kernel.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.kernels.coagulation import CoagKernel
from src.kernels.collision import CollisionFragSpec
from src.kernels.fragmentation import FragSpec
from src.kernels.theta import ThetaProfile
from src.models import (
    BoundReport,
    ModelKind,
    SimConfig,
    TrendReport,
    TrendSeries,
    ValidationReport,
    Violation,
)
from src.settings import SYMMETRY_TOL

logger = logging.getLogger(__name__)

MASS_IDENTITY_RTOL = 1.0e-12


@dataclass(frozen=True, eq=False)
class KernelSet:
    """Every coefficient of one model: coagulation, fragmentation, collisions."""

    coag: CoagKernel
    frag: FragSpec
    collision: Optional[CollisionFragSpec] = None

    @classmethod
    def from_config(cls, cfg: SimConfig) -> "KernelSet":
        collision = None
        if cfg.collision is not None and cfg.model == ModelKind.COLLISION_FRAG:
            collision = CollisionFragSpec.from_descriptor(cfg.collision)
        return cls(
            coag=CoagKernel.from_descriptor(cfg.kernel),
            frag=FragSpec.from_descriptor(cfg.fragmentation, cfg.n),
            collision=collision,
        )

    def describe(self) -> dict:
        return {
            "coagulation": self.coag.describe(),
            "fragmentation": self.frag.family.value,
            "collision": self.collision.describe() if self.collision else None,
        }


def _pairs(mask: np.ndarray) -> list[tuple[int, ...]]:
    return [tuple(int(x) + 1 for x in idx) for idx in np.argwhere(mask)]


def _symmetry_violations(name: str, m: np.ndarray) -> list[Violation]:
    out = []
    scale = np.maximum(1.0, np.abs(m))
    for i, j in _pairs(np.triu(np.abs(m - m.T) > SYMMETRY_TOL * scale, k=1)):
        out.append(
            Violation(
                rule=f"{name}_symmetric",
                indices=(i, j),
                detail=f"{m[i - 1, j - 1]!r} != {m[j - 1, i - 1]!r}",
            )
        )
    for i, j in _pairs(m < 0):
        out.append(
            Violation(
                rule=f"{name}_nonnegative",
                indices=(i, j),
                detail=f"value {m[i - 1, j - 1]!r}",
            )
        )
    return out


def _frag_violations(frag: FragSpec) -> list[Violation]:
    out = []
    B, beta = frag.B, frag.beta
    n = frag.n
    if n >= 1 and B[0] != 0.0:
        out.append(Violation(rule="B1_zero", indices=(1,), detail=f"B_1 = {B[0]!r}"))
    for i in np.flatnonzero(B < 0):
        out.append(
            Violation(rule="B_nonnegative", indices=(int(i) + 1,), detail=f"{B[i]!r}")
        )
    for i, j in _pairs(beta < 0):
        out.append(Violation(rule="beta_nonnegative", indices=(i, j)))
    for i, j in _pairs(np.triu(beta != 0.0)):
        out.append(
            Violation(rule="beta_lower_triangular", indices=(i, j), detail="j >= i")
        )

    sizes = np.arange(1, n + 1, dtype=np.float64)
    daughters_mass = beta @ sizes
    for i in np.flatnonzero(B > 0):
        size = i + 1
        if size < 2:
            continue
        if abs(daughters_mass[i] - size) > MASS_IDENTITY_RTOL * size:
            out.append(
                Violation(
                    rule="frag_mass_identity",
                    indices=(int(size),),
                    detail=(
                        f"sum_j j beta_{{{size},j}} = {daughters_mass[i]!r} != {size}"
                    ),
                )
            )
    return out


def _collision_violations(coll: CollisionFragSpec, n: int) -> list[Violation]:
    b = coll.b_matrix(n)
    out = _symmetry_violations("b", b)
    if n >= 1 and b[0, 0] != 0.0:
        out.append(Violation(rule="b11_zero", indices=(1, 1)))

    sizes = np.arange(1, n + 1)
    k, l = sizes[:, None], sizes[None, :]
    produced = np.zeros((n, n))
    for i in range(1, n):
        beta_i = coll.beta3(i, k, l)
        bad = beta_i < 0
        if np.any(bad):
            out.extend(
                Violation(rule="beta3_nonnegative", indices=(i, kk, ll))
                for kk, ll in _pairs(bad)
            )
        if np.any(beta_i != beta_i.T):
            out.append(Violation(rule="beta3_symmetric", indices=(i,)))
        produced += i * beta_i

    target = (k + l).astype(np.float64)
    bad = (b > 0) & (np.abs(produced - target) > MASS_IDENTITY_RTOL * target)
    for kk, ll in _pairs(bad):
        out.append(
            Violation(
                rule="collision_mass_identity",
                indices=(kk, ll),
                detail=f"sum_i i beta = {produced[kk - 1, ll - 1]!r} != {kk + ll}",
            )
        )
    return out


def validate_structure(k: KernelSet, n: int) -> ValidationReport:
    """
    List every violated structural hypothesis of ``k`` on sizes 1..n.

    Args:
        k: Coefficient set
        n: Truncation size

    Returns:
        ValidationReport whose violation list is empty iff the set is valid
    """
    violations = _symmetry_violations("a", k.coag.matrix(n))
    violations += _frag_violations(k.frag.up_to(n))
    if k.collision is not None:
        violations += _collision_violations(k.collision, n)

    if violations:
        logger.warning(f"⚠️ {len(violations)} structural violation(s) up to N={n}")
    return ValidationReport(n=n, violations=violations)


# ---------------------------------------------------------------------------
# Sublinearity trends
# ---------------------------------------------------------------------------


def _aitken_limit(samples: np.ndarray) -> float:
    if len(samples) < 3:
        return float(samples[-1])
    s0, s1, s2 = samples[-3:]
    denom = s2 - 2.0 * s1 + s0
    if abs(denom) <= 1e-14 * max(abs(s0), abs(s1), abs(s2), 1e-300):
        return float(s2)
    return float(s2 - (s2 - s1) ** 2 / denom)


def _trend(name: str, values: np.ndarray, js: list[int]) -> TrendSeries:
    """``values[j-1]`` for j = 1..J; sampled at ``js``."""
    running = np.maximum.accumulate(values)
    idx = np.asarray(js) - 1
    samples = values[idx]
    nonincreasing = bool(np.all(np.diff(samples) <= 1e-12 * np.abs(samples[:-1])))
    limit = max(0.0, _aitken_limit(samples))
    peak = float(samples.max())
    return TrendSeries(
        name=name,
        samples=samples.tolist(),
        running_sup=running[idx].tolist(),
        decay=nonincreasing and limit <= 0.5 * peak,
        limit_estimate=limit,
    )


def sublinearity_trend(k: KernelSet, i: int, horizon: int) -> TrendReport:
    """
    Finite-horizon view of the growth conditions at fixed size ``i``.

    Samples a_{i,j}/j and B_{i+j} beta_{i+j,i}/(i+j) (plus the collision
    analogues b_{i,l}/l and max_k b_{k,l} beta_{i,k,l}/(k l)) at
    j = J/16, J/8, ..., J, with their running suprema. A limit is never
    asserted; ``decay`` only reports the trend.

    Args:
        k: Coefficient set
        i: Fixed cluster size
        horizon: Probe horizon J (>= 16)

    Returns:
        TrendReport; ``K_i`` is the running supremum of the fragmentation ratio
    """
    if horizon < 16:
        raise ValueError(f"probe horizon must be at least 16, got {horizon}")

    J = horizon
    if k.coag.n_max < J:
        logger.warning(
            f"⚠️ Kernel table stops at {k.coag.n_max}; trend horizon capped"
        )
        J = max(16, k.coag.n_max)
    js = [max(1, J // 2**p) for p in (4, 3, 2, 1, 0)]
    j = np.arange(1, J + 1)

    series = [_trend("coag_a_ij_over_j", k.coag.rates(np.full(J, i), j) / j, js)]

    frag = k.frag.up_to(i + J)
    parent = i + j
    frag_ratio = frag.B[parent - 1] * frag.beta[parent - 1, i - 1] / parent
    frag_series = _trend("frag_B_beta_over_size", frag_ratio, js)
    series.append(frag_series)

    if k.collision is not None:
        coll = k.collision
        J_c = min(J, coll.n_max)
        j_c = j[:J_c]
        js_c = [min(x, J_c) for x in js]
        series.append(
            _trend("collision_b_over_l", coll.rates(np.full(J_c, i), j_c) / j_c, js_c)
        )
        sup_k = np.empty(J_c)
        for idx, l in enumerate(j_c):
            kk = np.arange(1, J_c + 1)
            ratio = coll.rates(kk, l) * coll.beta3(i, kk, l) / (kk * l)
            sup_k[idx] = ratio.max()
        series.append(_trend("collision_sup_b_beta_over_kl", sup_k, js_c))

    report = TrendReport(
        i=i,
        horizon=J,
        js=js,
        series=series,
        K_i=frag_series.running_sup[-1],
    )
    logger.info(
        f"📈 Sublinearity trend i={i}, J={J}: "
        + ", ".join(f"{s.name} decay={s.decay}" for s in series)
    )
    return report


# ---------------------------------------------------------------------------
# theta domination
# ---------------------------------------------------------------------------


def check_theta_domination(
    kernel: CoagKernel, theta: ThetaProfile, probe_range: int
) -> BoundReport:
    """
    Sweep max_{1 <= i <= j <= R} a_{i,j} - (i+j) theta(j/i).

    Pass iff the maximum is <= 0. The weaker a_{i,j} <= C_theta (i+j) is
    swept too and recorded in the details.
    """
    R = min(probe_range, kernel.n_max)
    worst, worst_pair = -np.inf, (1, 1)
    worst_c = -np.inf
    c_theta = theta.c_theta
    for i in range(1, R + 1):
        j = np.arange(i, R + 1)
        a = kernel.rates(np.full(j.shape, i), j)
        excess = a - (i + j) * theta(j / i)
        pos = int(np.argmax(excess))
        if excess[pos] > worst:
            worst, worst_pair = float(excess[pos]), (i, int(j[pos]))
        worst_c = max(worst_c, float(np.max(a - c_theta * (i + j))))

    report = BoundReport.evaluate(
        formula="a_ij <= (i+j) theta(j/i)",
        measured=worst,
        bound=0.0,
        details={
            "argmax": list(worst_pair),
            "probe_range": R,
            "theta": theta.describe(),
            "C_theta": c_theta,
            "max_a_minus_C_theta_sum": worst_c,
        },
    )
    logger.info(
        f"🔎 theta domination for {kernel.describe()} over R={R}: "
        f"{report.status.value} (max excess {worst:.3e} at {worst_pair})"
    )
    return report
