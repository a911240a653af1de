"""
Deterministic, compensated reductions.

numpy reduces a contiguous last axis with pairwise summation, so every
size/space sum in the package goes through ``pairwise_sum``, which moves the
reduced axis last and forces a contiguous copy. Scalar totals that feed
identity checks use ``math.fsum``. Running time integrals use
``KahanAccumulator``.
"""

import math

import numpy as np


def pairwise_sum(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Sum along ``axis`` with numpy's pairwise reduction in a fixed order."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        return arr
    arr = np.ascontiguousarray(np.moveaxis(arr, axis, -1))
    return np.add.reduce(arr, axis=-1)


def exact_sum(values) -> float:
    """Correctly rounded sum of all entries (Shewchuk via ``math.fsum``)."""
    return math.fsum(np.asarray(values, dtype=np.float64).ravel().tolist())


def exact_dot(weights, values) -> float:
    """Correctly rounded sum of elementwise products."""
    w = np.asarray(weights, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    return exact_sum(w * v)


class KahanAccumulator:
    """Running compensated sum of arrays of a fixed shape.

    Neumaier's variant of Kahan summation: the compensation also captures
    the low bits of the running sum when an increment is larger than it.
    Like ``math.fsum`` but incremental, for space-time integrals that grow
    one time step at a time.
    """

    def __init__(self, shape=()):
        self._sum = np.zeros(shape, dtype=np.float64)
        self._comp = np.zeros(shape, dtype=np.float64)

    def add(self, value) -> None:
        x = np.asarray(value, dtype=np.float64)
        t = self._sum + x
        self._comp = self._comp + np.where(
            np.abs(self._sum) >= np.abs(x), (self._sum - t) + x, (x - t) + self._sum
        )
        self._sum = t

    @property
    def value(self) -> np.ndarray:
        return np.asarray(self._sum + self._comp, dtype=np.float64)

    def __float__(self) -> float:
        return float(self._sum + self._comp)
