"""
Reaction right-hand sides on a truncated size range 1..N.

Concentrations are arrays of shape (N,) for one cell or (N, M) for M cells,
with ``c[i-1]`` the concentration of size i. Every size sum is a
fixed-order pairwise reduction (``src.summation.pairwise_sum``), so results
do not depend on BLAS threading.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.kernels.coagulation import CoagKernel
from src.kernels.collision import CollisionFragSpec
from src.kernels.fragmentation import FragSpec
from src.models import DaughterFamily, TruncationMode
from src.settings import BETA3_TABLE_N_MAX
from src.summation import pairwise_sum

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CellState:
    """Concentrations c_1..c_N of one cell (or a batch of cells along axis 1)."""

    c: np.ndarray

    @property
    def n(self) -> int:
        return int(np.shape(self.c)[0])


CellLike = Union[CellState, np.ndarray]


def _array(cell: CellLike) -> np.ndarray:
    c = cell.c if isinstance(cell, CellState) else cell
    return np.asarray(c, dtype=np.float64)


@dataclass
class RateTerms:
    """Gain and loss parts of one reaction operator."""

    gain: np.ndarray
    loss: np.ndarray

    @property
    def net(self) -> np.ndarray:
        return self.gain - self.loss


@dataclass
class CollisionTerms:
    """The four right-hand-side terms of the collision model."""

    coag_gain: np.ndarray
    coag_loss: np.ndarray
    coll_gain: np.ndarray
    coll_loss: np.ndarray

    @property
    def net(self) -> np.ndarray:
        return (self.coag_gain + self.coll_gain) - (self.coag_loss + self.coll_loss)


@dataclass
class ReactionTerms:
    """Every term of the full right-hand side at one state, plus the leak rate."""

    coag: RateTerms
    frag: RateTerms
    coll: Optional[RateTerms]
    leak: np.ndarray

    @property
    def net(self) -> np.ndarray:
        gain = self.coag.gain + self.frag.gain
        loss = self.coag.loss + self.frag.loss
        if self.coll is not None:
            gain = gain + self.coll.gain
            loss = loss + self.coll.loss
        return gain - loss


def _sum_indices(n: int) -> np.ndarray:
    """Flat (p-1)*n + (q-1) indices of pairs with p + q = i, padded with n*n."""
    idx = np.full((n, max(n - 1, 1)), n * n, dtype=np.int64)
    for i in range(2, n + 1):
        p = np.arange(1, i)
        idx[i - 1, : i - 1] = (p - 1) * n + (i - p - 1)
    return idx


class ReactionSystem:
    """
    Precomputed coefficient arrays for repeated right-hand-side evaluation.

    Args:
        coag: Coagulation kernel
        frag: Fragmentation coefficients (extended or cut to ``n``)
        n: Truncation size N
        mode: Truncation mode for the coagulation loss range
        collision: Optional collision-induced fragmentation
    """

    def __init__(
        self,
        coag: CoagKernel,
        frag: FragSpec,
        n: int,
        mode: TruncationMode = TruncationMode.CONSERVATIVE,
        collision: Optional[CollisionFragSpec] = None,
    ):
        self.n = n
        self.mode = mode
        self.sizes = np.arange(1, n + 1, dtype=np.float64)

        self.a = coag.matrix(n)
        pair_sum = self.sizes[:, None] + self.sizes[None, :]
        self.inside = pair_sum <= n
        if mode == TruncationMode.NON_CONSERVATIVE:
            self.a_loss = self.a
        else:
            self.a_loss = np.where(self.inside, self.a, 0.0)
        self.a_leak = np.where(self.inside, 0.0, self.a)
        self.gain_index = _sum_indices(n)

        frag = frag.up_to(n)
        self.B = frag.B
        self.beta = frag.beta
        # feed[i-1, s-1] = B_s beta_{s,i}
        self.feed = frag.daughter_weights().T.copy()
        self.has_frag = bool(np.any(self.B > 0))

        self.collision = collision
        if collision is not None:
            self.b = collision.b_matrix(n)
            if collision.daughters == DaughterFamily.UNIFORM_MASS:
                k, l = self.sizes[:, None], self.sizes[None, :]
                m = np.maximum(k, l) - 1.0
                denom = m * (m + 1.0) * (m + 2.0)
                self.pair_weight = np.where(
                    denom > 0, 6.0 * (k + l) / np.where(denom > 0, denom, 1.0), 0.0
                )
                # ramp[i-1, m] = max(m + 1 - i, 0)
                ramp = np.arange(n)[None, :] + 1.0 - self.sizes[:, None]
                self.ramp = np.maximum(ramp, 0.0)
                self.bucket_index = self._bucket_index(n)
                self.beta3 = None
            else:
                if n > BETA3_TABLE_N_MAX:
                    raise ValueError(
                        f"dense collision daughters need N <= {BETA3_TABLE_N_MAX}"
                    )
                self.beta3 = collision.dense_beta3(n).reshape(n, n * n)

        logger.debug(
            f"ReactionSystem ready: N={n}, mode={mode.value}, "
            f"frag={self.has_frag}, collision={collision is not None}"
        )

    @staticmethod
    def _bucket_index(n: int) -> np.ndarray:
        """Flat indices of pairs with max(k, l) = m + 1, padded with n*n."""
        idx = np.full((n, 2 * n - 1), n * n, dtype=np.int64)
        for s in range(1, n + 1):
            row = [(s - 1) * n + (q - 1) for q in range(1, s + 1)]
            col = [(p - 1) * n + (s - 1) for p in range(1, s)]
            flat = row + col
            idx[s - 1, : len(flat)] = flat
        return idx

    # -- shape helpers ------------------------------------------------------

    @staticmethod
    def _cells(c: np.ndarray) -> np.ndarray:
        """(N,) or (N, M) -> contiguous (M, N)."""
        return np.ascontiguousarray(np.atleast_2d(c.T) if c.ndim == 2 else c[None, :])

    @staticmethod
    def _restore(x: np.ndarray, like: np.ndarray) -> np.ndarray:
        return x[0] if like.ndim == 1 else np.ascontiguousarray(x.T)

    def _products(self, X: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """(M, N*N + 1) flat weights[p, q] c_p c_q with a trailing zero pad slot."""
        M, n = X.shape
        prod = weights[None, :, :] * X[:, :, None] * X[:, None, :]
        flat = np.zeros((M, n * n + 1))
        flat[:, : n * n] = prod.reshape(M, n * n)
        return flat

    # -- operators ----------------------------------------------------------

    def coag_terms(self, c: np.ndarray) -> RateTerms:
        X = self._cells(c)
        flat = self._products(X, self.a)
        gain = 0.5 * pairwise_sum(flat[:, self.gain_index], axis=-1)
        loss = X * pairwise_sum(self.a_loss[None, :, :] * X[:, None, :], axis=-1)
        return RateTerms(gain=self._restore(gain, c), loss=self._restore(loss, c))

    def frag_terms(self, c: np.ndarray) -> RateTerms:
        X = self._cells(c)
        if self.has_frag:
            gain = pairwise_sum(self.feed[None, :, :] * X[:, None, :], axis=-1)
        else:
            gain = np.zeros_like(X)
        loss = self.B[None, :] * X
        return RateTerms(gain=self._restore(gain, c), loss=self._restore(loss, c))

    def collision_terms(self, c: np.ndarray) -> Optional[RateTerms]:
        if self.collision is None:
            return None
        X = self._cells(c)
        M, n = X.shape
        loss = X * pairwise_sum(self.b[None, :, :] * X[:, None, :], axis=-1)
        if self.beta3 is None:
            flat = self._products(X, self.b * self.pair_weight)
            buckets = pairwise_sum(flat[:, self.bucket_index], axis=-1)
            spread = self.ramp[None, :, :] * buckets[:, None, :]
            gain = 0.5 * pairwise_sum(spread, axis=-1)
        else:
            pairs = self.b[None, :, :] * X[:, :, None] * X[:, None, :]
            pairs = pairs.reshape(M, n * n)
            spread = self.beta3[None, :, :] * pairs[:, None, :]
            gain = 0.5 * pairwise_sum(spread, axis=-1)
        return RateTerms(gain=self._restore(gain, c), loss=self._restore(loss, c))

    def leak_rate(self, c: np.ndarray) -> np.ndarray:
        """Mass leaving the truncation per unit time (zero in Conservative mode)."""
        X = self._cells(c)
        if self.mode == TruncationMode.CONSERVATIVE:
            leak = np.zeros(X.shape[0])
        else:
            inner = pairwise_sum(self.a_leak[None, :, :] * X[:, None, :], axis=-1)
            leak = pairwise_sum(self.sizes[None, :] * X * inner, axis=-1)
        return leak[0] if c.ndim == 1 else leak

    def terms(self, c: np.ndarray) -> ReactionTerms:
        return ReactionTerms(
            coag=self.coag_terms(c),
            frag=self.frag_terms(c),
            coll=self.collision_terms(c),
            leak=self.leak_rate(c),
        )

    def rate(self, c: np.ndarray) -> np.ndarray:
        """dc/dt from reactions alone."""
        return self.terms(c).net


# ---------------------------------------------------------------------------
# Single-shot operators
# ---------------------------------------------------------------------------


def eval_coag(cell: CellLike, kernel: CoagKernel, mode: TruncationMode) -> RateTerms:
    """
    Coagulation rates Q_i = Q_i^+ - Q_i^-.

    Q_i^+ = 1/2 sum_{j<i} a_{i-j,j} c_{i-j} c_j; the loss sum runs over
    j <= N - i (Conservative) or j <= N (NonConservative).
    """
    c = _array(cell)
    n = c.shape[0]
    system = ReactionSystem(kernel, FragSpec.none(n), n, mode)
    return system.coag_terms(c)


def eval_frag(cell: CellLike, frag: FragSpec) -> RateTerms:
    """F_i = sum_{i+j<=N} B_{i+j} beta_{i+j,i} c_{i+j} - B_i c_i."""
    c = _array(cell)
    n = c.shape[0]
    system = ReactionSystem(CoagKernel.from_matrix(np.zeros((n, n))), frag, n)
    return system.frag_terms(c)


def eval_collision_frag(
    cell: CellLike,
    kernel: CoagKernel,
    collision: CollisionFragSpec,
    mode: TruncationMode,
) -> CollisionTerms:
    """
    Coagulation plus collision-induced fragmentation.

    Collision gain is 1/2 sum over ordered pairs (k, l) of
    b_{k,l} c_k c_l beta_{i,k,l}; collision loss is sum_k b_{i,k} c_i c_k.
    """
    c = _array(cell)
    n = c.shape[0]
    system = ReactionSystem(kernel, FragSpec.none(n), n, mode, collision=collision)
    coag = system.coag_terms(c)
    coll = system.collision_terms(c)
    return CollisionTerms(
        coag_gain=coag.gain,
        coag_loss=coag.loss,
        coll_gain=coll.gain,
        coll_loss=coll.loss,
    )
