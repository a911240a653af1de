"""Decay profiles theta used to dominate admissible kernels."""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.kernels.coagulation import phi
from src.models import PhiChoice, ThetaDescriptor, ThetaFamily, Violation

logger = logging.getLogger(__name__)

TABLE = "table"


@dataclass(frozen=True, eq=False)
class ThetaProfile:
    """
    theta on [0, inf) -> (0, inf), always evaluated through its envelope
    sup_{y >= x} theta(y).

    Closed forms are floored at ``floor`` so that theta stays bounded near 0:
    ``power`` is scale * max(x, floor)^(-epsilon), ``inv_sqrt_phi`` is
    scale / sqrt(phi(max(x, floor))). Tables are samples (xs, values) held
    piecewise constant to the right.
    """

    family: str = ThetaFamily.POWER.value
    epsilon: float = 0.5
    scale: float = 1.0
    floor: float = 0.5
    phi: PhiChoice = PhiChoice.LOG
    xs: Optional[np.ndarray] = field(default=None, repr=False)
    values: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_descriptor(cls, desc: ThetaDescriptor) -> "ThetaProfile":
        return cls(
            family=desc.family.value,
            epsilon=desc.epsilon,
            scale=desc.scale,
            floor=desc.floor,
            phi=desc.phi,
        )

    @classmethod
    def power(cls, epsilon: float, scale: float = 1.0, floor: float = 0.5):
        return cls(
            family=ThetaFamily.POWER.value, epsilon=epsilon, scale=scale, floor=floor
        )

    @classmethod
    def constant(cls, value: float) -> "ThetaProfile":
        return cls(family=ThetaFamily.CONSTANT.value, scale=value)

    @classmethod
    def from_samples(cls, xs, values) -> "ThetaProfile":
        xs = np.asarray(xs, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        order = np.argsort(xs)
        xs, values = xs[order], values[order]
        # envelope over the samples
        envelope = np.maximum.accumulate(values[::-1])[::-1]
        return cls(family=TABLE, xs=xs, values=envelope)

    def _raw(self, x: np.ndarray) -> np.ndarray:
        if self.family == ThetaFamily.POWER.value:
            return self.scale * np.maximum(x, self.floor) ** (-self.epsilon)
        if self.family == ThetaFamily.INV_SQRT_PHI.value:
            return self.scale / np.sqrt(phi(np.maximum(x, self.floor), self.phi))
        if self.family == ThetaFamily.CONSTANT.value:
            return np.full(x.shape, self.scale, dtype=np.float64)
        if self.family == TABLE:
            idx = np.searchsorted(self.xs, x, side="left")
            idx = np.minimum(idx, len(self.xs) - 1)
            return self.values[idx]
        raise ValueError(f"Unknown theta family: {self.family}")

    def __call__(self, x) -> np.ndarray:
        """Envelope theta~(x); closed forms are already nonincreasing."""
        return self._raw(np.asarray(x, dtype=np.float64))

    @property
    def c_theta(self) -> float:
        """C_theta = sup theta."""
        if self.family == TABLE:
            return float(self.values.max())
        return float(self(0.0))

    @property
    def decays(self) -> bool:
        return self.family != ThetaFamily.CONSTANT.value

    def describe(self) -> str:
        if self.family == TABLE:
            return f"table(n={len(self.xs)})"
        if self.family == ThetaFamily.POWER.value:
            return f"power(epsilon={self.epsilon:g}, scale={self.scale:g})"
        if self.family == ThetaFamily.INV_SQRT_PHI.value:
            return f"inv_sqrt_phi(phi={self.phi.value}, scale={self.scale:g})"
        return f"constant({self.scale:g})"

    def validate(self, x_max: float = 1.0e6, samples: int = 256) -> list[Violation]:
        """Positivity, monotonicity and theta(2x) < theta(x) on a log grid of x >= 1."""
        x = np.geomspace(1.0, x_max, samples)
        th = self(x)
        out = []
        bad = np.flatnonzero(~(th > 0))
        if bad.size:
            out.append(
                Violation(
                    rule="theta_positive",
                    indices=tuple(bad.tolist()),
                    detail="theta must be positive",
                )
            )
        bad = np.flatnonzero(np.diff(th) > 0)
        if bad.size:
            out.append(
                Violation(
                    rule="theta_nonincreasing",
                    indices=tuple(bad.tolist()),
                    detail="theta envelope increased",
                )
            )
        bad = np.flatnonzero(~(self(2.0 * x) < th))
        if bad.size:
            out.append(
                Violation(
                    rule="theta_decay",
                    indices=tuple(bad.tolist()),
                    detail=f"theta(2x) >= theta(x) at x={x[bad[0]]:g}",
                )
            )
        return out
