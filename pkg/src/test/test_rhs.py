"""Tests for the reaction right-hand sides and their weak-form identities."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from src.analysis import coag_gain_constant, frag_gain_constant
from src.kernels import CoagKernel, CollisionFragSpec, FragSpec, KernelSet
from src.models import TruncationMode
from src.rhs import (
    CellState,
    ReactionSystem,
    eval_coag,
    eval_collision_frag,
    eval_frag,
    mass_flux,
    weak_form_pair,
    weak_form_terms,
)


def assert_weak_form_agrees(direct: float, weak: float):
    assert abs(direct - weak) <= 1e-12 * (abs(direct) + abs(weak) + 1.0)


# ---------------------------------------------------------------------------
# Single-shot operators
# ---------------------------------------------------------------------------


@pytest.mark.rhs
def test_eval_coag_by_hand(constant_kernel):
    c = CellState(np.array([1.0, 2.0, 3.0]))
    conservative = eval_coag(c, constant_kernel, TruncationMode.CONSERVATIVE)
    np.testing.assert_allclose(conservative.gain, [0.0, 0.5, 2.0])
    np.testing.assert_allclose(conservative.loss, [3.0, 2.0, 0.0])

    leaky = eval_coag(c, constant_kernel, TruncationMode.NON_CONSERVATIVE)
    np.testing.assert_allclose(leaky.gain, conservative.gain)
    np.testing.assert_allclose(leaky.loss, [6.0, 12.0, 18.0])


@pytest.mark.rhs
def test_eval_coag_monodisperse_pair(constant_kernel):
    terms = eval_coag(
        np.array([2.0, 0.0, 0.0]), constant_kernel, TruncationMode.CONSERVATIVE
    )
    np.testing.assert_allclose(terms.net, [-4.0, 2.0, 0.0])


@pytest.mark.rhs
def test_eval_coag_largest_size_only(constant_kernel):
    c = np.array([0.0, 0.0, 1.0])
    conservative = eval_coag(c, constant_kernel, TruncationMode.CONSERVATIVE)
    np.testing.assert_array_equal(conservative.net, [0.0, 0.0, 0.0])

    leaky = eval_coag(c, constant_kernel, TruncationMode.NON_CONSERVATIVE)
    np.testing.assert_allclose(leaky.net, [0.0, 0.0, -1.0])


def _collision_from_entries(b_entries, beta_entries, n=3):
    """Collision coefficients with the listed (k, l) rates and (i, k, l) daughters."""
    b = np.zeros((n, n))
    for (k, l), value in b_entries.items():
        b[k - 1, l - 1] = b[l - 1, k - 1] = value
    beta = np.zeros((n, n, n))
    for (i, k, l), value in beta_entries.items():
        beta[i - 1, k - 1, l - 1] = beta[i - 1, l - 1, k - 1] = value
    return CollisionFragSpec.from_matrix(b, beta)


@pytest.mark.rhs
@pytest.mark.parametrize(
    "b_entries, beta_entries, c",
    [
        ({(2, 2): 1.0}, {(1, 2, 2): 4.0}, [0.0, 1.0, 0.0]),
        ({(1, 2): 1.0}, {(1, 1, 2): 3.0}, [1.0, 1.0, 0.0]),
    ],
    ids=["dimer-dimer", "monomer-dimer"],
)
def test_eval_collision_frag_by_hand(b_entries, beta_entries, c):
    no_coag = CoagKernel.from_matrix(np.zeros((3, 3)))
    collision = _collision_from_entries(b_entries, beta_entries)
    terms = eval_collision_frag(
        np.array(c), no_coag, collision, TruncationMode.CONSERVATIVE
    )
    np.testing.assert_allclose(terms.coll_gain - terms.coll_loss, [2.0, -1.0, 0.0])
    np.testing.assert_allclose(terms.net, [2.0, -1.0, 0.0])
    assert mass_flux(terms.net) == 0.0


@pytest.mark.rhs
def test_eval_frag_by_hand():
    B = np.array([0.0, 2.0])
    beta = np.array([[0.0, 0.0], [2.0, 0.0]])
    terms = eval_frag(np.array([0.0, 1.0]), FragSpec.from_arrays(B, beta))
    np.testing.assert_allclose(terms.gain, [4.0, 0.0])
    np.testing.assert_allclose(terms.loss, [0.0, 2.0])
    assert mass_flux(terms.net) == 0.0


@pytest.mark.rhs
def test_generated_fragmentation_has_zero_mass_flux(linear_frag_set, rng):
    terms = eval_frag(rng.random(20), linear_frag_set.frag)
    assert abs(mass_flux(terms.net)) <= 1e-12 * np.sum(terms.loss * np.arange(1, 21))


@pytest.mark.rhs
def test_collision_fragmentation_conserves_mass(collision_set, rng):
    c = rng.random(20)
    terms = eval_collision_frag(
        c, collision_set.coag, collision_set.collision, TruncationMode.CONSERVATIVE
    )
    sizes = np.arange(1, 21)
    produced = mass_flux(terms.coll_gain)
    removed = mass_flux(terms.coll_loss)
    assert produced == pytest.approx(removed, rel=1e-12)
    assert terms.coll_gain[-1] == 0.0
    assert np.all(terms.coll_loss >= 0)
    assert abs(mass_flux(terms.net)) <= 1e-11 * np.sum(sizes * terms.coag_loss)


# ---------------------------------------------------------------------------
# Weak form
# ---------------------------------------------------------------------------


@pytest.mark.rhs
@pytest.mark.parametrize("trial", range(100))
def test_weak_form_linear_fragmentation(linear_frag_set, rng, trial):
    c = rng.random(20) * rng.random()
    phi = rng.random(20) * 10.0
    direct, weak = weak_form_pair(c, linear_frag_set, phi)
    assert_weak_form_agrees(direct, weak)


@pytest.mark.rhs
@pytest.mark.parametrize("trial", range(100))
def test_weak_form_collision_model(collision_set, rng, trial):
    c = rng.random(20)
    phi = np.sqrt(np.arange(1, 21)) + rng.random(20)
    direct, weak = weak_form_pair(c, collision_set, phi)
    assert_weak_form_agrees(direct, weak)


@pytest.mark.rhs
def test_weak_form_with_mass_weights_vanishes(linear_frag_set, rng):
    terms = weak_form_terms(rng.random(20), linear_frag_set, np.arange(1.0, 21.0))
    assert terms["coag"] == 0.0
    assert abs(terms["frag"]) <= 1e-11
    assert terms["collision"] == 0.0


@pytest.mark.rhs
@pytest.mark.parametrize("trial", range(20))
def test_fragmentation_dissipates_superlinear_weights(linear_frag_set, rng, trial):
    sizes = np.arange(1, 21)
    c = rng.random(20)
    phi = sizes * np.cumsum(rng.random(20))
    frag = linear_frag_set.frag
    scale = float(np.sum(frag.B * c * phi)) + 1.0

    weak = weak_form_terms(c, linear_frag_set, phi)["frag"]
    assert weak <= 1e-12 * scale

    direct = float(np.dot(phi, eval_frag(c, frag).net))
    assert direct <= 1e-12 * scale
    assert direct == pytest.approx(weak, rel=1e-10, abs=1e-12 * scale)


@pytest.mark.rhs
@pytest.mark.parametrize("trial", range(10))
def test_gain_terms_respect_pointwise_bounds(linear_frag_set, rng, trial):
    n = 20
    c = rng.random(n) * rng.random()
    rho = float(np.sum(np.arange(1, n + 1) * c))
    frag_gain = eval_frag(c, linear_frag_set.frag).gain
    coag_gain = eval_coag(c, linear_frag_set.coag, TruncationMode.CONSERVATIVE).gain
    for i in range(1, n + 1):
        k_i = frag_gain_constant(linear_frag_set, i, n)
        assert frag_gain[i - 1] <= k_i * rho * (1 + 1e-12)
        a_sum = coag_gain_constant(linear_frag_set, i)
        assert coag_gain[i - 1] <= 0.5 * rho**2 * a_sum * (1 + 1e-12)


@pytest.mark.rhs
def test_weak_form_rejects_multi_cell_state(linear_frag_set):
    with pytest.raises(ValueError):
        weak_form_terms(np.ones((20, 3)), linear_frag_set, np.ones(20))


# ---------------------------------------------------------------------------
# Truncation and batched evaluation
# ---------------------------------------------------------------------------


@pytest.mark.rhs
def test_conservative_truncation_has_no_mass_flux(linear_frag_set, rng):
    system = ReactionSystem(linear_frag_set.coag, linear_frag_set.frag, 20)
    c = rng.random(20)
    terms = system.terms(c)
    parts = terms.coag.gain + terms.coag.loss + terms.frag.gain + terms.frag.loss
    scale = np.sum(np.arange(1, 21) * parts) + 1.0
    assert abs(mass_flux(terms.net)) <= 1e-12 * scale
    assert system.leak_rate(c) == 0.0


@pytest.mark.rhs
def test_non_conservative_mass_loss_equals_leak(constant_kernel, rng):
    system = ReactionSystem(
        constant_kernel, FragSpec.none(10), 10, TruncationMode.NON_CONSERVATIVE
    )
    c = rng.random(10)
    leak = system.leak_rate(c)
    assert leak > 0
    assert -mass_flux(system.rate(c)) == pytest.approx(leak, rel=1e-11)


@pytest.mark.rhs
def test_batched_cells_match_single_cell(collision_set, rng):
    system = ReactionSystem(
        collision_set.coag,
        collision_set.frag,
        20,
        collision=collision_set.collision,
    )
    c = rng.random((20, 4))
    batched = system.rate(c)
    for m in range(4):
        np.testing.assert_allclose(batched[:, m], system.rate(c[:, m]), rtol=1e-14)


# ---------------------------------------------------------------------------
# Homogeneous ODE reference
# ---------------------------------------------------------------------------


@pytest.mark.rhs
def test_constant_kernel_monodisperse_solution(constant_kernel):
    n = 32
    system = ReactionSystem(
        constant_kernel, FragSpec.none(n), n, TruncationMode.NON_CONSERVATIVE
    )
    c0 = np.zeros(n)
    c0[0] = 1.0
    sol = solve_ivp(
        lambda t, y: system.rate(y),
        (0.0, 1.0),
        c0,
        method="DOP853",
        rtol=1e-11,
        atol=1e-14,
    )
    c1 = sol.y[:, -1]
    total = 2.0 / 3.0
    expected = total**2 * (1.0 - total) ** np.arange(8)
    assert c1[0] == pytest.approx(4.0 / 9.0, rel=1e-6)
    np.testing.assert_allclose(c1[:8], expected, rtol=1e-6)


@pytest.mark.rhs
def test_kernel_set_reaction_terms_split(linear_frag_set, rng):
    system = ReactionSystem(linear_frag_set.coag, linear_frag_set.frag, 20)
    terms = system.terms(rng.random(20))
    assert terms.coll is None
    np.testing.assert_allclose(
        terms.net,
        terms.coag.net + terms.frag.net,
        rtol=1e-12,
        atol=1e-12,
    )


@pytest.mark.rhs
def test_weak_form_short_weights_raise(linear_frag_set):
    kset = KernelSet(coag=linear_frag_set.coag, frag=linear_frag_set.frag)
    with pytest.raises(ValueError):
        weak_form_pair(np.ones(20), kset, np.ones(5))
