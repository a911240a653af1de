"""Mass-loss scans over the truncation size N."""

import logging
from typing import Optional, Sequence

from joblib import Parallel, delayed

from src.models import (
    GelationRow,
    GelationScanResult,
    GelationVerdict,
    SimConfig,
    TruncationMode,
)
from src.pde.simulation import run
from src.settings import N_JOBS

logger = logging.getLogger(__name__)

PLATEAU_RTOL = 0.20
PLATEAU_FLOOR = 0.05
DECAY_RATIO = 0.7


def gelation_verdict(losses: Sequence[float]) -> GelationVerdict:
    """
    Classify mass losses ordered by increasing N.

    Gelation-consistent when the last two losses are within 20% of each
    other and both above 0.05; conservation-consistent when each loss is at
    most 0.7 times the previous one; inconclusive otherwise.
    """
    if len(losses) < 2:
        return GelationVerdict.INCONCLUSIVE
    a, b = losses[-2], losses[-1]
    if min(a, b) > PLATEAU_FLOOR and abs(a - b) <= PLATEAU_RTOL * max(a, b):
        return GelationVerdict.GELATION
    if all(cur <= DECAY_RATIO * prev for prev, cur in zip(losses, losses[1:])):
        return GelationVerdict.CONSERVATION
    return GelationVerdict.INCONCLUSIVE


def _scan_point(cfg: SimConfig, n: int) -> GelationRow:
    tracked = [i for i in cfg.tracked_sizes if i <= n] or [1]
    instance = cfg.model_copy(update={"n": n, "tracked_sizes": tracked})
    traj = run(SimConfig.model_validate(instance.model_dump()))
    loss = float(traj.leaked[-1]) / float(traj.mass[0])
    logger.info(f"🔎 gelation scan N={n}: mass loss {loss:.6g}")
    return GelationRow(n=n, mass_loss=loss)


def gelation_scan(
    cfg: SimConfig, sizes: Sequence[int], n_jobs: Optional[int] = None
) -> GelationScanResult:
    """
    Run ``cfg`` at each N in ``sizes`` and classify the mass lost past N.

    Loss is the mass leaked through the truncation by ``t_final`` divided by
    the initial mass.

    Args:
        cfg: Template configuration in NonConservative mode
        sizes: Strictly increasing truncation sizes
        n_jobs: joblib workers (defaults to COAGFRAG_N_JOBS)

    Raises:
        ValueError: If the template is Conservative or sizes are not increasing
    """
    if cfg.truncation != TruncationMode.NON_CONSERVATIVE:
        raise ValueError("gelation scans need NonConservative truncation")
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"scan sizes must be strictly increasing: {sizes}")

    logger.info(f"📥 gelation scan over N={sizes}")
    rows = Parallel(n_jobs=n_jobs or N_JOBS)(
        delayed(_scan_point)(cfg, n) for n in sizes
    )
    verdict = gelation_verdict([row.mass_loss for row in rows])
    logger.info(f"✅ gelation scan verdict: {verdict.value}")
    return GelationScanResult(rows=rows, verdict=verdict)
