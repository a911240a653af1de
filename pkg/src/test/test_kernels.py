"""Tests for coefficient families, tables and structural checks."""

import numpy as np
import pytest

from src.kernels import (
    CoagKernel,
    CollisionFragSpec,
    FragSpec,
    KernelIndexError,
    KernelSet,
    KernelTableError,
    ThetaProfile,
    check_theta_domination,
    coag_rate,
    load_frag_table,
    load_kernel_table,
    sublinearity_trend,
    uniform_mass_daughters,
    validate_structure,
)
from src.models import (
    BoundStatus,
    CoagFamily,
    FragFamily,
    KernelDescriptor,
    ModelKind,
)
from src.settings import N_MAX_CAP

CLOSED_FAMILIES = [f for f in CoagFamily if f != CoagFamily.CUSTOM_TABLE]


def kernel(family: CoagFamily, **params) -> CoagKernel:
    return CoagKernel.from_descriptor(KernelDescriptor(family=family, **params))


# ---------------------------------------------------------------------------
# Coagulation kernels
# ---------------------------------------------------------------------------


@pytest.mark.kernels
@pytest.mark.parametrize("family", CLOSED_FAMILIES)
def test_closed_families_are_exactly_symmetric(family, rng):
    k = kernel(family, alpha=0.3, beta=0.6)
    i = rng.integers(1, 500, size=200)
    j = rng.integers(1, 500, size=200)
    np.testing.assert_array_equal(k.rates(i, j), k.rates(j, i))
    assert np.all(k.rates(i, j) >= 0)


@pytest.mark.kernels
def test_family_values():
    assert coag_rate(kernel(CoagFamily.CONSTANT, c=2.0), 3, 7) == 2.0
    assert coag_rate(kernel(CoagFamily.ADDITIVE), 3, 7) == 10.0
    assert coag_rate(kernel(CoagFamily.MULTIPLICATIVE), 3, 7) == 21.0
    assert coag_rate(kernel(CoagFamily.SQRT_PRODUCT), 4, 9) == pytest.approx(6.0)
    assert coag_rate(kernel(CoagFamily.POWER_SYM, alpha=1.0, beta=0.0), 2, 5) == 7.0
    critical = coag_rate(kernel(CoagFamily.CRITICAL_LOG), 1, 1)
    assert critical == pytest.approx(2.0)


@pytest.mark.kernels
def test_matrix_layout():
    m = kernel(CoagFamily.ADDITIVE).matrix(4)
    assert m.shape == (4, 4)
    assert m[0, 3] == 5.0
    assert m[2, 1] == 5.0


@pytest.mark.kernels
def test_index_range_errors():
    k = kernel(CoagFamily.CONSTANT)
    with pytest.raises(KernelIndexError):
        coag_rate(k, 0, 1)
    with pytest.raises(KernelIndexError):
        coag_rate(k, 1, N_MAX_CAP + 1)
    table = CoagKernel.from_matrix(np.ones((3, 3)))
    assert coag_rate(table, 3, 3) == 1.0
    with pytest.raises(KernelIndexError):
        coag_rate(table, 4, 1)


@pytest.mark.kernels
def test_from_matrix_requires_square():
    with pytest.raises(KernelTableError):
        CoagKernel.from_matrix(np.ones((2, 3)))


# ---------------------------------------------------------------------------
# Table loading
# ---------------------------------------------------------------------------


@pytest.mark.kernels
def test_load_kernel_table_fills_mirror_entries(tmp_path):
    path = tmp_path / "kernel.csv"
    path.write_text("i,j,value\n1,1,1.0\n1,2,0.5\n2,2,3.0\n")
    table = load_kernel_table(path)
    np.testing.assert_array_equal(table, [[1.0, 0.5], [0.5, 3.0]])


@pytest.mark.kernels
def test_load_kernel_table_rejects_asymmetry(tmp_path):
    path = tmp_path / "kernel.csv"
    path.write_text("i,j,value\n1,2,0.5\n2,1,0.6\n")
    with pytest.raises(KernelTableError, match="asymmetric"):
        load_kernel_table(path)


@pytest.mark.kernels
def test_load_kernel_table_rejects_negative_values(tmp_path):
    path = tmp_path / "kernel.csv"
    path.write_text("i,j,value\n1,1,-1.0\n")
    with pytest.raises(KernelTableError):
        load_kernel_table(path)


@pytest.mark.kernels
def test_load_kernel_table_missing_file(tmp_path):
    with pytest.raises(KernelTableError):
        load_kernel_table(tmp_path / "missing.csv")


@pytest.mark.kernels
def test_load_frag_table(tmp_path):
    path = tmp_path / "frag.csv"
    path.write_text("i,j,value\n2,0,1.5\n2,1,2.0\n")
    frag = load_frag_table(path)
    assert frag.B[1] == 1.5
    assert frag.beta[1, 0] == 2.0
    extended = frag.up_to(4)
    assert extended.n == 4
    assert extended.B[3] == 0.0


# ---------------------------------------------------------------------------
# Fragmentation and collisions
# ---------------------------------------------------------------------------


@pytest.mark.kernels
@pytest.mark.parametrize("family", [FragFamily.BINARY_UNIFORM, FragFamily.EROSION])
def test_generated_fragmentation_conserves_mass(family):
    frag = FragSpec.generate(family, 30, rate=1.0, exponent=1.0)
    sizes = np.arange(1, 31, dtype=np.float64)
    assert frag.B[0] == 0.0
    np.testing.assert_allclose((frag.beta @ sizes)[1:], sizes[1:], rtol=1e-12)
    assert not np.any(np.triu(frag.beta))


@pytest.mark.kernels
def test_uniform_mass_daughters_conserve_mass():
    sizes = np.arange(1, 21)
    for k in range(1, 21):
        for l in range(1, 21):
            if k == l == 1:
                continue
            produced = np.sum(sizes * uniform_mass_daughters(sizes, k, l))
            assert produced == pytest.approx(k + l, rel=1e-12)


@pytest.mark.kernels
def test_collision_rates_vanish_for_monomer_pairs():
    spec = CollisionFragSpec(kernel=kernel(CoagFamily.CONSTANT))
    assert spec.rates(1, 1) == 0.0
    assert spec.rates(1, 2) == 1.0
    assert spec.b_matrix(3)[0, 0] == 0.0
    assert spec.gain_constant(1, 10) > 0


@pytest.mark.kernels
def test_dense_beta3_matches_closed_form():
    spec = CollisionFragSpec(kernel=kernel(CoagFamily.CONSTANT))
    dense = spec.dense_beta3(6)
    assert dense[0, 2, 3] == pytest.approx(uniform_mass_daughters(1, 3, 4))
    sizes = np.arange(1, 7, dtype=np.float64)
    produced = np.tensordot(sizes, dense, axes=(0, 0))
    assert produced[2, 3] == pytest.approx(7.0, rel=1e-12)


# ---------------------------------------------------------------------------
# Structural validation
# ---------------------------------------------------------------------------


@pytest.mark.kernels
def test_valid_sets_have_no_violations(linear_frag_set, collision_set):
    assert validate_structure(linear_frag_set, 20).valid
    assert validate_structure(collision_set, 12).valid


@pytest.mark.kernels
def test_violations_are_reported_as_data(constant_kernel):
    B = np.array([1.0, 1.0, 0.0])
    beta = np.zeros((3, 3))
    beta[1, 0] = 1.0  # daughters of size 2 carry mass 1
    beta[0, 2] = 1.0  # above the diagonal
    report = validate_structure(
        KernelSet(coag=constant_kernel, frag=FragSpec.from_arrays(B, beta)), 3
    )
    rules = {v.rule for v in report.violations}
    assert not report.valid
    assert {"B1_zero", "beta_lower_triangular", "frag_mass_identity"} <= rules


@pytest.mark.kernels
def test_asymmetric_table_is_flagged():
    a = np.ones((3, 3))
    a[0, 1] = 2.0
    k = KernelSet(coag=CoagKernel.from_matrix(a), frag=FragSpec.none(3))
    report = validate_structure(k, 3)
    assert [v.rule for v in report.violations] == ["a_symmetric"]
    assert report.violations[0].indices == (1, 2)


@pytest.mark.kernels
def test_kernel_set_from_config(config_factory):
    cfg = config_factory(
        model=ModelKind.COLLISION_FRAG,
        collision={"kernel": {"family": "constant", "c": 0.5}},
    )
    kset = KernelSet.from_config(cfg)
    assert kset.collision is not None
    assert kset.describe()["collision"].startswith("collision(")


# ---------------------------------------------------------------------------
# Growth trends and theta domination
# ---------------------------------------------------------------------------


@pytest.mark.kernels
def test_sublinearity_trend_constant_kernel_decays(linear_frag_set):
    report = sublinearity_trend(linear_frag_set, 2, 256)
    coag = report.series[0]
    assert coag.name == "coag_a_ij_over_j"
    assert report.js == [16, 32, 64, 128, 256]
    assert coag.decay


@pytest.mark.kernels
def test_sublinearity_trend_multiplicative_does_not_decay():
    kset = KernelSet(coag=kernel(CoagFamily.MULTIPLICATIVE), frag=FragSpec.none(4))
    report = sublinearity_trend(kset, 3, 128)
    assert report.series[0].samples == [3.0] * 5
    assert not report.series[0].decay


@pytest.mark.kernels
def test_theta_profiles():
    theta = ThetaProfile.power(0.5)
    assert theta(4.0) == pytest.approx(0.5)
    assert theta.c_theta == pytest.approx(0.5**-0.5)
    assert theta.validate() == []
    rules = {v.rule for v in ThetaProfile.constant(1.0).validate()}
    assert "theta_decay" in rules


@pytest.mark.kernels
def test_theta_from_samples_uses_envelope():
    theta = ThetaProfile.from_samples([1.0, 2.0, 3.0], [1.0, 2.0, 0.5])
    assert theta(1.0) == 2.0
    assert theta(3.0) == 0.5


@pytest.mark.kernels
def test_theta_domination(sqrt_kernel):
    theta = ThetaProfile.power(0.5)
    ok = check_theta_domination(sqrt_kernel, theta, 100)
    assert ok.status == BoundStatus.PASS
    bad = check_theta_domination(kernel(CoagFamily.MULTIPLICATIVE), theta, 100)
    assert bad.status == BoundStatus.FAIL
    assert bad.details["argmax"][1] == 100
