"""
Coagulation kernel families a_{i,j}.

Closed-form families are evaluated from a formula whose two halves are
combined with commutative IEEE operations only, so a_{i,j} == a_{j,i}
holds bit-for-bit. CustomTable kernels are loaded from a CSV of
(i, j, value) triples and symmetrized on load.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from src.models import CoagFamily, KernelDescriptor, PhiChoice
from src.settings import N_MAX_CAP, SYMMETRY_TOL

logger = logging.getLogger(__name__)


class KernelIndexError(Exception):
    """Exception raised when a size index falls outside 1..N_max."""

    pass


class KernelTableError(Exception):
    """Exception raised when a coefficient table cannot be loaded or is invalid."""

    pass


FAMILY_FORMULAS = {
    CoagFamily.CONSTANT: "c",
    CoagFamily.ADDITIVE: "c (i + j)",
    CoagFamily.MULTIPLICATIVE: "c i j",
    CoagFamily.POWER_SYM: "c (i^alpha j^beta + i^beta j^alpha)",
    CoagFamily.SLOW_SUBLINEAR: (
        "c (i/phi(i) + j/phi(j)), phi = log(1+x) | log(1+log(1+x))"
    ),
    CoagFamily.SQRT_PRODUCT: "c sqrt(i j)",
    CoagFamily.LOG_RATIO: "c (i sqrt(log(1+j))/log(1+i) + j sqrt(log(1+i))/log(1+j))",
    CoagFamily.CRITICAL_LOG: "c (i log(1+j)/log(1+i) + j log(1+i)/log(1+j))",
    CoagFamily.CUSTOM_TABLE: "dense symmetric table from CSV (i, j, value)",
}


def phi(x: np.ndarray, choice: PhiChoice) -> np.ndarray:
    """Slowly growing gauge function used by the sublinear families."""
    x = np.asarray(x, dtype=np.float64)
    if choice == PhiChoice.ITERATED_LOG:
        return np.log1p(np.log1p(x))
    return np.log1p(x)


@dataclass(frozen=True)
class CoagKernel:
    """A coagulation kernel: a family name plus its parameters."""

    family: CoagFamily
    c: float = 1.0
    alpha: float = 0.5
    beta: float = 0.5
    phi: PhiChoice = PhiChoice.LOG
    table: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @classmethod
    def from_descriptor(cls, desc: KernelDescriptor) -> "CoagKernel":
        if desc.family == CoagFamily.CUSTOM_TABLE:
            return cls.from_matrix(load_kernel_table(desc.table), c=desc.c)
        return cls(
            family=desc.family,
            c=desc.c,
            alpha=desc.alpha,
            beta=desc.beta,
            phi=desc.phi,
        )

    @classmethod
    def from_matrix(cls, matrix, c: float = 1.0) -> "CoagKernel":
        """Wrap a dense (n, n) array as a CustomTable kernel (scaled by ``c``)."""
        arr = np.array(matrix, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise KernelTableError(f"kernel table must be square, got {arr.shape}")
        arr.setflags(write=False)
        return cls(family=CoagFamily.CUSTOM_TABLE, c=c, table=arr)

    @property
    def n_max(self) -> int:
        if self.table is not None:
            return int(self.table.shape[0])
        return N_MAX_CAP

    def _evaluate(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        i = np.asarray(i, dtype=np.float64)
        j = np.asarray(j, dtype=np.float64)
        fam = self.family
        c = self.c

        if fam == CoagFamily.CONSTANT:
            return np.full(np.broadcast(i, j).shape, c, dtype=np.float64)
        if fam == CoagFamily.ADDITIVE:
            return c * (i + j)
        if fam == CoagFamily.MULTIPLICATIVE:
            return c * (i * j)
        if fam == CoagFamily.POWER_SYM:
            return c * (i**self.alpha * j**self.beta + i**self.beta * j**self.alpha)
        if fam == CoagFamily.SLOW_SUBLINEAR:
            return c * (i / phi(i, self.phi) + j / phi(j, self.phi))
        if fam == CoagFamily.SQRT_PRODUCT:
            return c * np.sqrt(i * j)
        if fam == CoagFamily.LOG_RATIO:
            li, lj = np.log1p(i), np.log1p(j)
            return c * (i * np.sqrt(lj) / li + j * np.sqrt(li) / lj)
        if fam == CoagFamily.CRITICAL_LOG:
            li, lj = np.log1p(i), np.log1p(j)
            return c * (i * lj / li + j * li / lj)
        if fam == CoagFamily.CUSTOM_TABLE:
            ii = i.astype(np.int64) - 1
            jj = j.astype(np.int64) - 1
            return c * self.table[ii, jj]
        raise ValueError(f"Unknown coagulation family: {fam}")

    def _check_range(self, idx: np.ndarray) -> None:
        idx = np.asarray(idx)
        if idx.size and (idx.min() < 1 or idx.max() > self.n_max):
            raise KernelIndexError(
                f"size index out of range 1..{self.n_max}: "
                f"[{int(idx.min())}, {int(idx.max())}]"
            )

    def rates(self, i, j) -> np.ndarray:
        """Broadcast evaluation of a_{i,j} over integer index arrays."""
        self._check_range(i)
        self._check_range(j)
        return self._evaluate(i, j)

    def matrix(self, n: int) -> np.ndarray:
        """Dense (n, n) array with ``out[i-1, j-1] = a_{i,j}``."""
        if n < 1 or n > self.n_max:
            raise KernelIndexError(f"matrix size {n} outside 1..{self.n_max}")
        sizes = np.arange(1, n + 1)
        return self._evaluate(sizes[:, None], sizes[None, :])

    def describe(self) -> str:
        if self.family == CoagFamily.CUSTOM_TABLE:
            return f"custom_table(n={self.n_max}, c={self.c:g})"
        params = {
            CoagFamily.POWER_SYM: f", alpha={self.alpha:g}, beta={self.beta:g}",
            CoagFamily.SLOW_SUBLINEAR: f", phi={self.phi.value}",
        }.get(self.family, "")
        return f"{self.family.value}(c={self.c:g}{params})"


def coag_rate(kernel: CoagKernel, i: int, j: int) -> float:
    """
    Coagulation rate a_{i,j}.

    Args:
        kernel: Kernel to evaluate
        i: First cluster size, 1 <= i <= N_max
        j: Second cluster size, 1 <= j <= N_max

    Returns:
        The nonnegative rate, symmetric in (i, j)

    Raises:
        KernelIndexError: If either index is out of range
    """
    return float(kernel.rates(np.array(i), np.array(j)))


def load_kernel_table(path: Union[str, Path]) -> np.ndarray:
    """
    Load a CustomTable kernel from a CSV of (i, j, value) triples.

    Missing mirror entries are filled from their partner; entries given in
    both orders must agree to SYMMETRY_TOL (relative) and are averaged.

    Raises:
        KernelTableError: On unreadable files, bad indices, negative values,
            asymmetric pairs, or tables larger than N_MAX_CAP
    """
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise KernelTableError(f"cannot read kernel table {path}: {e}") from e

    missing = {"i", "j", "value"} - set(df.columns)
    if missing:
        raise KernelTableError(f"kernel table {path} missing columns {sorted(missing)}")

    i = df["i"].to_numpy(dtype=np.int64)
    j = df["j"].to_numpy(dtype=np.int64)
    v = df["value"].to_numpy(dtype=np.float64)
    if len(df) == 0:
        raise KernelTableError(f"kernel table {path} is empty")
    if min(i.min(), j.min()) < 1:
        raise KernelTableError(f"kernel table {path} has indices below 1")
    n = int(max(i.max(), j.max()))
    if n > N_MAX_CAP:
        raise KernelTableError(f"kernel table {path} has size {n} > cap {N_MAX_CAP}")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise KernelTableError(f"kernel table {path} has negative or non-finite values")

    table = np.zeros((n, n), dtype=np.float64)
    given = np.zeros((n, n), dtype=bool)
    table[i - 1, j - 1] = v
    given[i - 1, j - 1] = True

    both = given & given.T
    diff = np.abs(table - table.T)
    scale = np.maximum(1.0, np.maximum(np.abs(table), np.abs(table.T)))
    bad = np.argwhere(both & (diff > SYMMETRY_TOL * scale))
    if bad.size:
        bi, bj = bad[0] + 1
        raise KernelTableError(
            f"kernel table {path} is asymmetric at ({bi}, {bj}): "
            f"{table[bi - 1, bj - 1]} vs {table[bj - 1, bi - 1]}"
        )

    sym = np.where(both, 0.5 * (table + table.T), np.where(given, table, table.T))
    logger.info(f"📥 Loaded {len(df)} kernel entries from {path} (n={n})")
    return sym
