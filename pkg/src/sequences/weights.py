"""
Constructive weight sequences.

``build_xi`` selects a subsequence of a bounded sequence mu whose partial
sums stay under the nondecreasing minorant of a diverging sequence nu.
``build_psi`` feeds it the particular mu, nu that make psi a superlinear
weight for theta-dominated kernels. ``build_lambda`` produces a diverging
lambda with sum lambda_i r_i finite for a given summable r.

Values are stored with an unused slot at index 0, so ``seq.values[i]`` is
the weight of size i.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence, Union

import numpy as np
from numba import njit

from src.kernels.theta import ThetaProfile
from src.summation import exact_dot, exact_sum

logger = logging.getLogger(__name__)

Oracle = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, Sequence[float]]


class SequenceRangeError(Exception):
    """Exception raised when a sequence is requested outside its defined range."""

    pass


class SequenceDataError(Exception):
    """Exception raised when sequence inputs violate their positivity requirements."""

    pass


class SequenceKind(str, Enum):
    XI = "xi"
    PSI = "psi"
    LAMBDA = "lambda"


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """A constructed sequence plus a record of how it was built."""

    values: np.ndarray = field(repr=False)
    kind: SequenceKind
    provenance: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.values.shape[0]) - 1

    def head(self, n: int) -> np.ndarray:
        """Values for sizes 1..n."""
        if n > self.n:
            raise SequenceRangeError(
                f"{self.kind.value} defined up to {self.n}, need {n}"
            )
        return self.values[1 : n + 1]

    @classmethod
    def from_values(
        cls, kind: SequenceKind, values, provenance: dict[str, Any] = None
    ) -> "WeightSequence":
        """Wrap values for sizes 1..n (index 0 is prepended)."""
        arr = np.concatenate([[0.0], np.asarray(values, dtype=np.float64)])
        arr.setflags(write=False)
        return cls(values=arr, kind=kind, provenance=provenance or {})


def _evaluate(oracle: Oracle, n: int, name: str, required: int) -> np.ndarray:
    """Values for sizes 1..n (or fewer if the oracle is a shorter array)."""
    if callable(oracle):
        values = np.asarray(oracle(np.arange(1, n + 1)), dtype=np.float64)
    else:
        values = np.asarray(oracle, dtype=np.float64)[:n]
    if values.shape[0] < required:
        raise SequenceRangeError(
            f"{name} has {values.shape[0]} entries, at least {required} needed"
        )
    if not np.all(values > 0):
        bad = int(np.flatnonzero(~(values > 0))[0]) + 1
        raise SequenceDataError(f"{name}_{bad} = {values[bad - 1]!r} is not positive")
    return values


@njit(fastmath=False, cache=True)
def _xi_recursion(mu, nu_tilde):
    n = mu.shape[0]
    xi = np.zeros(n)
    total = 0.0
    for k in range(n):
        if mu[k] + total <= nu_tilde[k]:
            xi[k] = mu[k]
            total += mu[k]
    return xi


def nondecreasing_minorant(nu: np.ndarray) -> np.ndarray:
    """nu~_i = min_{j >= i} nu_j over the available horizon."""
    return np.minimum.accumulate(nu[::-1])[::-1]


def build_xi(mu: Oracle, nu: Oracle, n: int) -> WeightSequence:
    """
    Select xi_i in {0, mu_i} with sum_{j<=i} xi_j <= nu~_i.

    nu is evaluated on 1..2n (the look-ahead horizon) before taking its
    nondecreasing minorant.

    Args:
        mu: Positive bounded sequence (callable on sizes or array for 1..)
        nu: Positive sequence, diverging by the caller's assertion
        n: Output length

    Returns:
        WeightSequence of kind XI

    Raises:
        SequenceRangeError: If n < 1 or an array input is too short
        SequenceDataError: If some mu_i or nu_i is not positive
    """
    if n < 1:
        raise SequenceRangeError(f"sequence length must be positive, got {n}")

    mu_vals = _evaluate(mu, n, "mu", n)
    nu_vals = _evaluate(nu, 2 * n, "nu", n)
    nu_tilde = nondecreasing_minorant(nu_vals)[:n]

    xi = _xi_recursion(np.ascontiguousarray(mu_vals), np.ascontiguousarray(nu_tilde))
    active = int(np.count_nonzero(xi))
    logger.debug(f"xi built: n={n}, active={active}, horizon={nu_vals.shape[0]}")
    return WeightSequence.from_values(
        SequenceKind.XI,
        xi,
        {
            "n": n,
            "active": active,
            "nu_horizon": int(nu_vals.shape[0]),
            "mu": mu_vals,
            "nu_tilde": nu_tilde,
        },
    )


def psi_mu(i: np.ndarray) -> np.ndarray:
    """mu_i = 1 / ((1+i) log(1+i))."""
    i = np.asarray(i, dtype=np.float64)
    return 1.0 / ((1.0 + i) * np.log1p(i))


def build_psi(theta: ThetaProfile, lam: WeightSequence, n: int) -> WeightSequence:
    """
    psi_i = sum_{j<=i} xi_j with mu from ``psi_mu`` and
    nu_i = min(lambda_i, 1 / theta(sqrt(i/2))).

    psi is nondecreasing with psi_i <= lambda_i and psi_i <= 1/theta(sqrt(i/2)).
    A non-decaying theta is accepted; psi then stays bounded by 1/C_theta
    and the provenance says so.

    Raises:
        SequenceRangeError: If lambda is shorter than n
        SequenceDataError: Propagated from build_xi
    """
    if lam.kind != SequenceKind.LAMBDA:
        raise SequenceDataError(
            f"build_psi needs a lambda sequence, got {lam.kind.value}"
        )
    if lam.n < n:
        raise SequenceRangeError(f"lambda defined up to {lam.n}, psi needs {n}")

    horizon = min(2 * n, lam.n)
    sizes = np.arange(1, horizon + 1, dtype=np.float64)
    theta_cap = 1.0 / theta(np.sqrt(sizes / 2.0))
    nu = np.minimum(lam.values[1 : horizon + 1], theta_cap)

    xi = build_xi(psi_mu, nu, n)
    psi = np.cumsum(xi.values[1:])

    bounded = not theta.decays
    if bounded:
        logger.warning(
            f"⚠️ theta={theta.describe()} does not decay: psi is capped by "
            f"1/C_theta = {1.0 / theta.c_theta:g} and cannot diverge"
        )
    logger.info(f"🧮 psi built: n={n}, psi_n={psi[-1]:.6g}, theta={theta.describe()}")
    return WeightSequence.from_values(
        SequenceKind.PSI,
        psi,
        {
            "n": n,
            "theta": theta.describe(),
            "lambda": lam.provenance.get("source", "custom"),
            "bounded": bounded,
            "increments": xi.values[1:].copy(),
            "increment_cap": xi.provenance["mu"],
            "lambda_cap": lam.values[1 : n + 1].copy(),
            "theta_cap": theta_cap[:n],
        },
    )


def _tail_sums(r: np.ndarray) -> np.ndarray:
    """T_k = sum_{k < i <= n} r_i for k = 0..n-1."""
    return np.cumsum(r[::-1])[::-1]


def build_lambda(r: Oracle, n: int) -> WeightSequence:
    """
    Dyadic de la Vallee-Poussin weights for a summable nonnegative r.

    lambda_i = 2^m on the block where 4^-(m+1) T_0 < T_{i-1} <= 4^-m T_0, so
    each block contributes at most 2^-m T_0 and sum lambda_i r_i <= 2 T_0.
    Past the last nonzero r_p the weights keep doubling at dyadic distances
    from p.

    Raises:
        SequenceRangeError: If n < 1 or r is shorter than n
        SequenceDataError: If r has negative or non-finite entries
    """
    if n < 1:
        raise SequenceRangeError(f"sequence length must be positive, got {n}")
    if callable(r):
        r_vals = np.asarray(r(np.arange(1, n + 1)), dtype=np.float64)
    else:
        r_vals = np.asarray(r, dtype=np.float64)[:n]
    if r_vals.shape[0] < n:
        raise SequenceRangeError(f"r has {r_vals.shape[0]} entries, {n} needed")
    if not np.all(np.isfinite(r_vals)) or np.any(r_vals < 0):
        raise SequenceDataError("r must be finite and nonnegative")

    T = _tail_sums(r_vals)
    T0 = float(T[0])
    if T0 == 0.0:
        logger.warning(
            "⚠️ build_lambda got an all-zero sequence; returning lambda = 1"
        )
        return WeightSequence.from_values(
            SequenceKind.LAMBDA,
            np.ones(n),
            {"source": "initial_data", "degenerate": True, "T0": 0.0},
        )

    positive = T > 0
    last = int(np.flatnonzero(positive)[-1]) + 1  # last size with T_{i-1} > 0
    Tp = T[:last]
    m = np.floor(np.log(T0 / Tp) / np.log(4.0)).astype(np.int64)
    m = np.maximum(m, 0)
    m -= (np.ldexp(Tp, 2 * m) > T0).astype(np.int64)
    m += (np.ldexp(Tp, 2 * (m + 1)) <= T0).astype(np.int64)
    m = np.maximum.accumulate(m)

    exponents = np.empty(n, dtype=np.int64)
    exponents[:last] = m
    if last < n:
        dist = np.arange(last + 1, n + 1) - last
        exponents[last:] = m[-1] + 1 + np.floor(np.log2(dist)).astype(np.int64)
    lam = np.ldexp(1.0, exponents)

    weighted = exact_dot(lam, r_vals)
    blocks = {}
    for block in np.unique(m):
        members = np.flatnonzero(m == block)
        blocks[int(block)] = exact_sum(lam[members] * r_vals[members])
    certificate = {
        "sum_lambda_r": weighted,
        "bound": 2.0 * T0,
        "margin": 2.0 * T0 - weighted,
        "block_sums": blocks,
    }
    logger.info(
        f"🧮 lambda built: n={n}, lambda_n={lam[-1]:g}, "
        f"sum lambda r = {weighted:.6g} <= {2.0 * T0:.6g}"
    )
    return WeightSequence.from_values(
        SequenceKind.LAMBDA,
        lam,
        {
            "source": "initial_data",
            "degenerate": False,
            "T0": T0,
            "certificate": certificate,
        },
    )


def closed_form_lambda(source: str, n: int) -> WeightSequence:
    """lambda_i = log(1+i) or lambda_i = i."""
    sizes = np.arange(1, n + 1, dtype=np.float64)
    if source == "log":
        values = np.log1p(sizes)
    elif source == "identity":
        values = sizes
    else:
        raise ValueError(f"Unknown closed-form lambda: {source}")
    return WeightSequence.from_values(SequenceKind.LAMBDA, values, {"source": source})
