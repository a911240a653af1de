"""
Linear fragmentation: break-up rates B_i and daughter distributions beta_{i,j}.

Arrays follow the coefficient convention ``B[i-1] = B_i`` and
``beta[i-1, j-1] = beta_{i,j}`` (lower triangular, j < i).
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from src.kernels.coagulation import KernelTableError
from src.models import FragDescriptor, FragFamily

logger = logging.getLogger(__name__)


def _rates(n: int, rate: float, exponent: float) -> np.ndarray:
    sizes = np.arange(1, n + 1, dtype=np.float64)
    B = rate * sizes**exponent
    B[0] = 0.0
    return B


def _binary_uniform(n: int) -> np.ndarray:
    beta = np.zeros((n, n), dtype=np.float64)
    for i in range(2, n + 1):
        row = np.full(i - 1, 2.0 / (i - 1))
        daughters = np.arange(1, i, dtype=np.float64)
        row *= i / np.dot(daughters, row)
        beta[i - 1, : i - 1] = row
    return beta


def _erosion(n: int) -> np.ndarray:
    beta = np.zeros((n, n), dtype=np.float64)
    if n >= 2:
        beta[1, 0] = 2.0
    for i in range(3, n + 1):
        beta[i - 1, 0] = 1.0
        beta[i - 1, i - 2] = 1.0
    return beta


@dataclass(frozen=True, eq=False)
class FragSpec:
    """Fragmentation coefficients up to size ``n``.

    Generated families can be re-built at any size with ``up_to``; tables are
    padded with zeros (no break-up) beyond their last row.
    """

    B: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    family: FragFamily = FragFamily.TABLE
    rate: float = 0.0
    exponent: float = 0.0

    @property
    def n(self) -> int:
        return int(self.B.shape[0])

    @classmethod
    def generate(
        cls, family: FragFamily, n: int, rate: float = 1.0, exponent: float = 0.0
    ) -> "FragSpec":
        if family == FragFamily.NONE:
            B = np.zeros(n)
            beta = np.zeros((n, n))
        elif family == FragFamily.BINARY_UNIFORM:
            B, beta = _rates(n, rate, exponent), _binary_uniform(n)
        elif family == FragFamily.EROSION:
            B, beta = _rates(n, rate, exponent), _erosion(n)
        else:
            raise ValueError(f"{family} is not a generated fragmentation family")
        return cls(B=B, beta=beta, family=family, rate=rate, exponent=exponent)

    @classmethod
    def from_arrays(cls, B, beta) -> "FragSpec":
        B = np.asarray(B, dtype=np.float64)
        beta = np.asarray(beta, dtype=np.float64)
        if beta.shape != (B.shape[0], B.shape[0]):
            raise KernelTableError(
                f"beta shape {beta.shape} does not match B length {B.shape[0]}"
            )
        return cls(B=B, beta=beta, family=FragFamily.TABLE)

    @classmethod
    def none(cls, n: int) -> "FragSpec":
        return cls.generate(FragFamily.NONE, n)

    @classmethod
    def from_descriptor(cls, desc: FragDescriptor, n: int) -> "FragSpec":
        if desc.family == FragFamily.TABLE:
            return load_frag_table(desc.table).up_to(n)
        return cls.generate(desc.family, n, rate=desc.rate, exponent=desc.exponent)

    def up_to(self, n: int) -> "FragSpec":
        """Same coefficients restricted or extended to sizes 1..n."""
        if n == self.n:
            return self
        if self.family != FragFamily.TABLE:
            return self.generate(self.family, n, rate=self.rate, exponent=self.exponent)
        m = min(n, self.n)
        B = np.zeros(n)
        beta = np.zeros((n, n))
        B[:m] = self.B[:m]
        beta[:m, :m] = self.beta[:m, :m]
        return FragSpec(B=B, beta=beta, family=FragFamily.TABLE)

    def daughter_weights(self) -> np.ndarray:
        """W[s-1, i-1] = B_s beta_{s,i}: rate at which size s feeds size i."""
        return self.B[:, None] * self.beta


def load_frag_table(path: Union[str, Path]) -> FragSpec:
    """
    Load a fragmentation table from a CSV of (i, j, value) rows.

    Rows with ``j == 0`` give B_i; rows with ``1 <= j < i`` give beta_{i,j}.

    Raises:
        KernelTableError: If the file is unreadable or has invalid indices
    """
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise KernelTableError(f"cannot read fragmentation table {path}: {e}") from e

    missing = {"i", "j", "value"} - set(df.columns)
    if missing:
        raise KernelTableError(
            f"fragmentation table {path} missing columns {sorted(missing)}"
        )
    i = df["i"].to_numpy(dtype=np.int64)
    j = df["j"].to_numpy(dtype=np.int64)
    v = df["value"].to_numpy(dtype=np.float64)
    if len(df) == 0 or i.min() < 1 or j.min() < 0 or np.any(j >= np.maximum(i, 1)):
        raise KernelTableError(f"fragmentation table {path} has invalid indices")

    n = int(i.max())
    B = np.zeros(n)
    beta = np.zeros((n, n))
    rate_rows = j == 0
    B[i[rate_rows] - 1] = v[rate_rows]
    beta[i[~rate_rows] - 1, j[~rate_rows] - 1] = v[~rate_rows]
    logger.info(f"📥 Loaded fragmentation table {path} (n={n})")
    return FragSpec(B=B, beta=beta, family=FragFamily.TABLE)
