"""Weak-form and mass-flux identities for the reaction operators."""

import logging
from typing import Union

import numpy as np

from src.kernels.validation import KernelSet
from src.models import TruncationMode
from src.rhs.reaction import CellLike, ReactionSystem, _array
from src.sequences.weights import WeightSequence
from src.summation import exact_dot, exact_sum, pairwise_sum

logger = logging.getLogger(__name__)

WEAK_FORM_RTOL = 1.0e-12

Weights = Union[np.ndarray, WeightSequence]


def _weights(phi: Weights, n: int) -> np.ndarray:
    """phi_1..phi_n from an array (``phi[i-1]``) or a WeightSequence."""
    if isinstance(phi, WeightSequence):
        return np.asarray(phi.head(n), dtype=np.float64)
    values = np.asarray(phi, dtype=np.float64)
    if values.shape[0] < n:
        raise ValueError(f"weights have {values.shape[0]} entries, {n} needed")
    return values[:n]


def weak_form_terms(cell: CellLike, k: KernelSet, phi: Weights) -> dict[str, float]:
    """
    Weak form of each operator in Conservative truncation.

    - coag: 1/2 sum_{i+j<=N} a_{i,j} c_i c_j (phi_{i+j} - phi_i - phi_j)
    - frag: -sum_{i>=2} B_i c_i (phi_i - sum_{j<i} beta_{i,j} phi_j)
    - collision: 1/2 sum_{k,l} b_{k,l} c_k c_l (sum_i beta_{i,k,l} phi_i
      - phi_k - phi_l)
    """
    c = _array(cell)
    if c.ndim != 1:
        raise ValueError("weak form is evaluated one cell at a time")
    n = c.shape[0]
    w = _weights(phi, n)
    sizes = np.arange(1, n + 1)
    i, j = sizes[:, None], sizes[None, :]

    a = k.coag.matrix(n)
    inside = (i + j) <= n
    w_pad = np.concatenate([w, np.zeros(n)])
    jump = np.where(inside, w_pad[i + j - 1] - w[i - 1] - w[j - 1], 0.0)
    coag = 0.5 * exact_sum(a * np.outer(c, c) * jump)

    frag_spec = k.frag.up_to(n)
    daughters = pairwise_sum(frag_spec.beta * w[None, :], axis=-1)
    frag = -exact_dot(frag_spec.B * c, w - daughters)

    terms = {"coag": coag, "frag": frag, "collision": 0.0}
    if k.collision is not None:
        b = k.collision.b_matrix(n)
        produced = np.zeros((n, n))
        for size in range(1, n):
            produced += k.collision.beta3(size, i, j) * w[size - 1]
        terms["collision"] = 0.5 * exact_sum(
            b * np.outer(c, c) * (produced - w[i - 1] - w[j - 1])
        )
    return terms


def weak_form_pair(cell: CellLike, k: KernelSet, phi: Weights) -> tuple[float, float]:
    """
    Direct and weak evaluations of sum_i phi_i (Q_i + F_i [+ Z_i]).

    Conservative truncation is implied. The two values agree to
    1e-12 (|direct| + |weak| + 1).

    Args:
        cell: Concentrations c_1..c_N of one cell
        k: Coefficient set (collision terms included when present)
        phi: Weights phi_1..phi_N

    Returns:
        (direct, weak)
    """
    c = _array(cell)
    n = c.shape[0]
    w = _weights(phi, n)
    system = ReactionSystem(
        k.coag, k.frag, n, TruncationMode.CONSERVATIVE, collision=k.collision
    )
    direct = exact_dot(w, system.rate(c))
    weak = sum(weak_form_terms(c, k, w).values())

    gap = abs(direct - weak)
    if gap > WEAK_FORM_RTOL * (abs(direct) + abs(weak) + 1.0):
        logger.warning(f"⚠️ weak form mismatch: direct={direct!r}, weak={weak!r}")
    return direct, weak


def mass_flux(rates) -> Union[float, np.ndarray]:
    """
    sum_i i rate_i.

    Args:
        rates: Array (N,) or per-cell array (N, M)

    Returns:
        A float for one cell, otherwise one value per cell
    """
    r = np.asarray(rates, dtype=np.float64)
    sizes = np.arange(1, r.shape[0] + 1, dtype=np.float64)
    if r.ndim == 1:
        return exact_dot(sizes, r)
    return np.array([exact_dot(sizes, col) for col in r.T])
