"""
Collision-induced fragmentation coefficients b_{k,l} and beta_{i,k,l}.

A collision of sizes k and l (at rate b_{k,l}) produces beta_{i,k,l}
daughters of every size i < max(k, l), with sum_i i beta_{i,k,l} = k + l.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from src.kernels.coagulation import CoagKernel, KernelTableError
from src.models import CollisionDescriptor, DaughterFamily
from src.settings import BETA3_TABLE_N_MAX, SYMMETRY_TOL

logger = logging.getLogger(__name__)


def uniform_mass_daughters(i, k, l) -> np.ndarray:
    """beta_{i,k,l} = 6 (k+l)(m+1-i) / (m (m+1)(m+2)) for i <= m = max(k,l) - 1."""
    i = np.asarray(i, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    l = np.asarray(l, dtype=np.float64)
    m = np.maximum(k, l) - 1.0
    denom = m * (m + 1.0) * (m + 2.0)
    safe = np.where(denom > 0, denom, 1.0)
    value = 6.0 * (k + l) * (m + 1.0 - i) / safe
    return np.where((i >= 1) & (i <= m) & (denom > 0), value, 0.0)


@dataclass(frozen=True, eq=False)
class CollisionFragSpec:
    """Collision rates (from a kernel, with b_{1,1} forced to zero) plus daughters."""

    kernel: CoagKernel
    daughters: DaughterFamily = DaughterFamily.UNIFORM_MASS
    table: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_descriptor(cls, desc: CollisionDescriptor) -> "CollisionFragSpec":
        table = None
        if desc.daughters == DaughterFamily.TABLE:
            table = load_daughter_table(desc.table)
        return cls(
            kernel=CoagKernel.from_descriptor(desc.kernel),
            daughters=desc.daughters,
            table=table,
        )

    @classmethod
    def from_matrix(cls, b, daughters=None) -> "CollisionFragSpec":
        """Dense b (and optionally a dense beta table indexed [i-1, k-1, l-1])."""
        if daughters is None:
            return cls(kernel=CoagKernel.from_matrix(b))
        table = np.asarray(daughters, dtype=np.float64)
        return cls(
            kernel=CoagKernel.from_matrix(b),
            daughters=DaughterFamily.TABLE,
            table=table,
        )

    @property
    def n_max(self) -> int:
        if self.table is not None:
            return min(self.kernel.n_max, int(self.table.shape[0]))
        return self.kernel.n_max

    def rates(self, k, l) -> np.ndarray:
        """b_{k,l} over broadcast index arrays."""
        b = self.kernel.rates(k, l)
        diag = (np.asarray(k) == 1) & (np.asarray(l) == 1)
        return np.where(diag, 0.0, b)

    def b_matrix(self, n: int) -> np.ndarray:
        b = np.array(self.kernel.matrix(n))
        b[0, 0] = 0.0
        return b

    def beta3(self, i, k, l) -> np.ndarray:
        """beta_{i,k,l} over broadcast index arrays (zero where undefined)."""
        if self.daughters == DaughterFamily.UNIFORM_MASS:
            return uniform_mass_daughters(i, k, l)
        i, k, l = (
            a.astype(np.int64)
            for a in np.broadcast_arrays(np.asarray(i), np.asarray(k), np.asarray(l))
        )
        n = self.table.shape[0]
        inside = (i >= 1) & (k >= 1) & (l >= 1) & (i <= n) & (k <= n) & (l <= n)
        out = np.zeros(i.shape, dtype=np.float64)
        out[inside] = self.table[i[inside] - 1, k[inside] - 1, l[inside] - 1]
        return out

    def dense_beta3(self, n: int) -> np.ndarray:
        """(n, n, n) ``out[i-1, k-1, l-1]``; closed forms renormalized to k + l."""
        if n > BETA3_TABLE_N_MAX:
            raise KernelTableError(
                f"dense beta table size {n} > cap {BETA3_TABLE_N_MAX}"
            )
        sizes = np.arange(1, n + 1)
        beta = self.beta3(
            sizes[:, None, None], sizes[None, :, None], sizes[None, None, :]
        )
        if self.daughters == DaughterFamily.UNIFORM_MASS:
            produced = np.tensordot(sizes.astype(np.float64), beta, axes=(0, 0))
            target = (sizes[:, None] + sizes[None, :]).astype(np.float64)
            safe = np.where(produced > 0, produced, 1.0)
            scale = np.where(produced > 0, target / safe, 1.0)
            beta = beta * scale[None, :, :]
        return beta

    def gain_constant(self, i: int, n: int) -> float:
        """S_i = max_{k,l <= n} b_{k,l} beta_{i,k,l} / (k l)."""
        sizes = np.arange(1, n + 1)
        k, l = sizes[:, None], sizes[None, :]
        ratio = self.rates(k, l) * self.beta3(i, k, l) / (k * l)
        return float(ratio.max()) if ratio.size else 0.0

    def describe(self) -> str:
        return (
            f"collision(b={self.kernel.describe()}, "
            f"daughters={self.daughters.value})"
        )


def load_daughter_table(path: Union[str, Path]) -> np.ndarray:
    """
    Load beta_{i,k,l} from a CSV with columns (i, k, l, value).

    Mirror entries (i, l, k) are filled in; pairs given both ways must agree.

    Raises:
        KernelTableError: If the file is invalid or exceeds BETA3_TABLE_N_MAX
    """
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise KernelTableError(f"cannot read daughter table {path}: {e}") from e

    missing = {"i", "k", "l", "value"} - set(df.columns)
    if missing:
        raise KernelTableError(
            f"daughter table {path} missing columns {sorted(missing)}"
        )
    i, k, l = (df[col].to_numpy(dtype=np.int64) for col in ("i", "k", "l"))
    v = df["value"].to_numpy(dtype=np.float64)
    if len(df) == 0 or min(i.min(), k.min(), l.min()) < 1:
        raise KernelTableError(f"daughter table {path} has invalid indices")
    if np.any(i >= np.maximum(k, l)):
        raise KernelTableError(f"daughter table {path} has daughters i >= max(k, l)")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise KernelTableError(
            f"daughter table {path} has negative or non-finite values"
        )

    n = int(max(k.max(), l.max()))
    if n > BETA3_TABLE_N_MAX:
        raise KernelTableError(
            f"daughter table {path} size {n} > cap {BETA3_TABLE_N_MAX}"
        )

    table = np.zeros((n, n, n))
    given = np.zeros((n, n, n), dtype=bool)
    table[i - 1, k - 1, l - 1] = v
    given[i - 1, k - 1, l - 1] = True
    mirror = np.swapaxes(table, 1, 2)
    mirror_given = np.swapaxes(given, 1, 2)
    both = given & mirror_given
    scale = np.maximum(1.0, np.maximum(np.abs(table), np.abs(mirror)))
    if np.any(both & (np.abs(table - mirror) > SYMMETRY_TOL * scale)):
        raise KernelTableError(f"daughter table {path} is not symmetric in (k, l)")

    sym = np.where(both, 0.5 * (table + mirror), np.where(given, table, mirror))
    logger.info(f"📥 Loaded {len(df)} daughter entries from {path} (n={n})")
    return sym
