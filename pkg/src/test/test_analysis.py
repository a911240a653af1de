"""Tests for moment series, a-priori bounds, gelation scans and tightness."""

from dataclasses import replace

import numpy as np
import pytest

from src.analysis import (
    MomentSeries,
    UntrackedSizeError,
    duality_report,
    gelation_scan,
    gelation_verdict,
    l1_terms_report,
    lambda_for,
    lambda_from_initial,
    log_moment_report,
    mass,
    mass_conservation_report,
    moment_series,
    phi_k,
    psi_for_trajectory,
    regularity_report,
    rho_l2_space_time,
    superlinear_report,
    superlinear_series,
    tightness_diagnostic,
)
from src.kernels import ThetaProfile
from src.models import (
    BoundStatus,
    GelationVerdict,
    LambdaDescriptor,
    LambdaSource,
    TimeParams,
    TruncationMode,
)
from src.pde import run
from src.sequences import SequenceKind, WeightSequence


def constant_state_run(config_factory, t_final: float):
    """A single size that never reacts, so rho stays at its initial value."""
    cfg = config_factory(
        n=1,
        tracked_sizes=[1],
        time=TimeParams(dt=1.0e-2, t_final=t_final, sample_stride=1),
    )
    return run(cfg)


# ---------------------------------------------------------------------------
# Moments and mass
# ---------------------------------------------------------------------------


@pytest.mark.analysis
def test_mass_conservation_report(diffusive_run):
    report = mass_conservation_report(diffusive_run)
    assert report.status == BoundStatus.PASS
    assert report.details["truncation"] == "conservative"
    assert report.details["accounted_drift"] <= 1e-8


@pytest.mark.analysis
def test_mass_conservation_report_with_zero_initial_mass(diffusive_run):
    zeros = np.zeros_like(diffusive_run.mass)
    empty = replace(
        diffusive_run, mass=zeros, leaked=zeros.copy(), clip_mass=zeros.copy()
    )
    report = mass_conservation_report(empty)
    assert report.status == BoundStatus.PASS
    assert report.measured == 0.0
    assert not report.details["relative"]

    drifting = replace(empty, mass=np.linspace(0.0, 1.0e-6, len(zeros)))
    report = mass_conservation_report(drifting)
    assert report.status == BoundStatus.FAIL
    assert report.measured == pytest.approx(1.0e-6)
    assert np.isfinite(report.details["accounted_drift"])


@pytest.mark.analysis
def test_moment_series_requires_enough_weights(diffusive_run):
    with pytest.raises(ValueError):
        moment_series(diffusive_run, np.ones(5))


@pytest.mark.analysis
def test_moment_series_rejects_unordered_times():
    with pytest.raises(ValueError):
        MomentSeries(name="bad", times=np.array([0.0, 0.2, 0.1]), values=np.zeros(3))


@pytest.mark.analysis
def test_unit_psi_moment_is_the_mass(diffusive_run):
    ones = WeightSequence.from_values(SequenceKind.PSI, np.ones(12))
    series = superlinear_series(diffusive_run, ones)
    np.testing.assert_allclose(series.values, mass(diffusive_run).values, rtol=1e-13)
    report = superlinear_report(diffusive_run, ones, constant=1.0e-6)
    assert report.status == BoundStatus.PASS


# ---------------------------------------------------------------------------
# Duality estimate
# ---------------------------------------------------------------------------


@pytest.mark.analysis
def test_duality_short_horizon_flags_linear_form(config_factory):
    stated, derived = duality_report(constant_state_run(config_factory, 0.09))
    assert stated.status == BoundStatus.FLAG
    assert derived.status == BoundStatus.PASS
    assert stated.measured == pytest.approx(0.3 * stated.details["rho0_l2"], rel=1e-12)
    assert stated.details["m_eff_in_range"]


@pytest.mark.analysis
def test_duality_long_horizon_passes(config_factory):
    stated, derived = duality_report(constant_state_run(config_factory, 4.0))
    assert stated.status == BoundStatus.PASS
    assert derived.status == BoundStatus.PASS


@pytest.mark.analysis
def test_duality_on_diffusive_run(diffusive_run):
    stated, derived = duality_report(diffusive_run)
    assert derived.ok
    assert stated.ok
    assert stated.details["quadrature_gap"] <= 1e-2 * stated.measured


@pytest.mark.analysis
def test_rho_l2_space_time_is_nondecreasing(diffusive_run):
    values = rho_l2_space_time(diffusive_run)
    assert values[0] == 0.0
    assert np.all(np.diff(values) >= 0)


# ---------------------------------------------------------------------------
# L1 bounds and regularity
# ---------------------------------------------------------------------------


@pytest.mark.analysis
def test_l1_terms_hold_on_diffusive_run(diffusive_run):
    reports = l1_terms_report(diffusive_run, [1, 2, 5])
    assert set(reports) == {1, 2, 5}
    for size, bounds in reports.items():
        assert len(bounds) == 4
        assert all(b.ok for b in bounds), size
        residual = bounds[3].details["equation_residual"]
        assert abs(residual) <= 1e-9


@pytest.mark.analysis
def test_l1_terms_untracked_size(diffusive_run):
    with pytest.raises(UntrackedSizeError):
        l1_terms_report(diffusive_run, [3])


@pytest.mark.analysis
def test_regularity_report(diffusive_run):
    reports = regularity_report(diffusive_run)
    assert set(reports) == {1, 2, 5}
    for report in reports.values():
        assert report.status == BoundStatus.PASS
        assert report.details["lp_norm"] > 0
        assert report.details["by_construction"] is True


# ---------------------------------------------------------------------------
# Superlinear moments
# ---------------------------------------------------------------------------


@pytest.mark.analysis
def test_log_moment_bound(diffusive_run):
    report = log_moment_report(diffusive_run)
    assert report.status == BoundStatus.PASS
    assert report.details["C"] == 2.0


@pytest.mark.analysis
def test_lambda_from_initial_data(diffusive_run):
    lam = lambda_from_initial(diffusive_run, 40)
    assert lam.n == 40
    assert lam.provenance["certificate"]["margin"] >= 0
    with pytest.raises(ValueError):
        lambda_for(LambdaDescriptor(source=LambdaSource.INITIAL_DATA), 10)


@pytest.mark.analysis
def test_psi_moment_bound_with_empirical_constant(diffusive_run, constant_kernel):
    psi, constant = psi_for_trajectory(
        diffusive_run,
        constant_kernel,
        ThetaProfile.power(0.5),
        LambdaDescriptor(source=LambdaSource.LOG),
    )
    assert psi.n == 24
    assert constant.status == BoundStatus.PASS
    report = superlinear_report(diffusive_run, psi, constant.details["C_emp"])
    assert report.status == BoundStatus.PASS


# ---------------------------------------------------------------------------
# Gelation scans and tightness
# ---------------------------------------------------------------------------


@pytest.mark.analysis
@pytest.mark.parametrize(
    "losses, verdict",
    [
        ([0.30, 0.32], GelationVerdict.GELATION),
        ([0.1, 0.05, 0.02], GelationVerdict.CONSERVATION),
        ([0.04, 0.035], GelationVerdict.INCONCLUSIVE),
        ([0.5], GelationVerdict.INCONCLUSIVE),
    ],
)
def test_gelation_verdict(losses, verdict):
    assert gelation_verdict(losses) == verdict


@pytest.mark.analysis
def test_gelation_scan_requires_non_conservative(config_factory):
    with pytest.raises(ValueError):
        gelation_scan(config_factory(), [8, 16])
    leaky = config_factory(truncation=TruncationMode.NON_CONSERVATIVE)
    with pytest.raises(ValueError):
        gelation_scan(leaky, [16, 8])


@pytest.mark.analysis
def test_gelation_scan_constant_kernel_conserves(config_factory):
    cfg = config_factory(
        truncation=TruncationMode.NON_CONSERVATIVE,
        time=TimeParams(dt=1.0e-2, t_final=1.0, sample_stride=50),
        tracked_sizes=[1],
    )
    result = gelation_scan(cfg, [8, 16, 32], n_jobs=1)
    assert [row.n for row in result.rows] == [8, 16, 32]
    assert result.rows[0].mass_loss > result.rows[-1].mass_loss
    assert result.verdict == GelationVerdict.CONSERVATION


@pytest.mark.analysis
def test_phi_k_weights():
    np.testing.assert_allclose(
        phi_k(4, 6), [0.0, 0.5, np.log(3) / np.log(4), 1.0, 1.0, 1.0]
    )
    with pytest.raises(ValueError):
        phi_k(1, 6)


@pytest.mark.analysis
def test_tightness_diagnostic(diffusive_run):
    result = tightness_diagnostic(diffusive_run, [8, 2, 4])
    assert list(result.series) == [2, 4, 8]
    summary = result.summary()
    assert summary["k"] == [2, 4, 8]
    assert set(summary["max_deviation"]) == {"2", "4", "8"}
    assert all(v >= 0 for v in result.deviations.values())
