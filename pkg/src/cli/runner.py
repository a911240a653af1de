"""
Scenario execution: one simulation (when a report needs it), the requested
analyses, and the artifacts of the run directory.

    <out>/manifest.json       effective configuration and outcome
    <out>/series/*.csv        trajectory, per-size integrals, moment series
    <out>/reports/*.json      one file per requested analysis
"""

import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Union

import numpy as np
import pandas as pd

from src.analysis import (
    UntrackedSizeError,
    duality_report,
    gelation_scan,
    l1_terms_report,
    lambda_for,
    log_moment_report,
    mass,
    mass_conservation_report,
    psi_for_trajectory,
    regularity_report,
    superlinear_report,
    superlinear_series,
    tightness_diagnostic,
)
from src.export import (
    moments_frame,
    sequence_frame,
    write_csv,
    write_json,
    write_trajectory,
)
from src.kernels import (
    KernelSet,
    KernelTableError,
    ThetaProfile,
    check_theta_domination,
    sublinearity_trend,
    validate_structure,
)
from src.models import (
    BoundReport,
    BoundStatus,
    DualityRequest,
    GelationScanRequest,
    L1TermsRequest,
    LambdaSource,
    LogMomentRequest,
    MassConservationRequest,
    PsiConstructionRequest,
    RegularityRequest,
    Scenario,
    StructureRequest,
    SublinearityRequest,
    SuperlinearRequest,
    ThetaDominationRequest,
    TightnessRequest,
)
from src.pde import NonFiniteStateError, StiffnessError, Trajectory, run
from src.sequences import (
    SequenceDataError,
    SequenceRangeError,
    build_psi,
    empirical_psi_constant,
    psi_case_bounds,
)
from src.settings import DEFAULT_OUTPUT_DIR, OUTPUT_DIR

logger = logging.getLogger(__name__)

# reports computed from the scenario's own trajectory
TRAJECTORY_REPORTS = (
    MassConservationRequest,
    DualityRequest,
    L1TermsRequest,
    SuperlinearRequest,
    LogMomentRequest,
    TightnessRequest,
    RegularityRequest,
)

EXIT_OK = 0
EXIT_FAILED_BOUND = 1
EXIT_RUN_ERROR = 2


@dataclass
class AnalysisOutcome:
    """Result of one requested analysis."""

    report: str
    payload: dict[str, Any] = field(default_factory=dict)
    bounds: list[BoundReport] = field(default_factory=list)
    frames: dict[str, pd.DataFrame] = field(default_factory=dict)
    failed: bool = False
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return not self.failed and all(b.ok for b in self.bounds)

    def to_json(self) -> dict:
        return {
            "report": self.report,
            "ok": self.ok,
            "error": self.error,
            "bounds": self.bounds,
            **self.payload,
        }


class ScenarioRunner:
    """
    Executes the analyses of one scenario against a lazily started run.

    Args:
        scenario: Validated scenario
        out_dir: Run directory for the artifacts
        n_jobs: joblib workers for gelation scans
    """

    def __init__(
        self, scenario: Scenario, out_dir: Path, n_jobs: Optional[int] = None
    ):
        self.scenario = scenario
        self.cfg = scenario.simulation
        self.out_dir = out_dir
        self.n_jobs = n_jobs
        self.kernels = KernelSet.from_config(self.cfg)
        self._trajectory: Optional[Trajectory] = None

        regularity = [a for a in scenario.analyses if isinstance(a, RegularityRequest)]
        self.lp_exponent = regularity[0].p if regularity else 3.0

    @property
    def needs_run(self) -> bool:
        analyses = self.scenario.analyses
        return not analyses or any(isinstance(a, TRAJECTORY_REPORTS) for a in analyses)

    @property
    def trajectory(self) -> Trajectory:
        if self._trajectory is None:
            self._trajectory = run(self.cfg, self.kernels, lp_exponent=self.lp_exponent)
            write_trajectory(self.out_dir, self._trajectory)
        return self._trajectory

    def handlers(self) -> dict[type, Callable[[Any], AnalysisOutcome]]:
        return {
            MassConservationRequest: self.mass_conservation,
            DualityRequest: self.duality,
            L1TermsRequest: self.l1_terms,
            SuperlinearRequest: self.superlinear,
            LogMomentRequest: self.log_moment,
            GelationScanRequest: self.gelation,
            TightnessRequest: self.tightness,
            StructureRequest: self.structure,
            SublinearityRequest: self.sublinearity,
            ThetaDominationRequest: self.theta_domination,
            PsiConstructionRequest: self.psi_construction,
            RegularityRequest: self.regularity,
        }

    def analyze(self, request) -> AnalysisOutcome:
        handler = self.handlers()[type(request)]
        try:
            return handler(request)
        except (
            UntrackedSizeError,
            SequenceRangeError,
            SequenceDataError,
            ValueError,
        ) as e:
            logger.error(f"❌ {request.report} failed: {e}")
            return AnalysisOutcome(request.report, failed=True, error=str(e))

    # -- trajectory reports -------------------------------------------------

    def mass_conservation(self, req: MassConservationRequest) -> AnalysisOutcome:
        traj = self.trajectory
        series = mass(traj)
        return AnalysisOutcome(
            req.report,
            bounds=[mass_conservation_report(traj, req.tolerance)],
            frames={"mass": moments_frame([series])},
        )

    def duality(self, req: DualityRequest) -> AnalysisOutcome:
        return AnalysisOutcome(req.report, bounds=duality_report(self.trajectory))

    def l1_terms(self, req: L1TermsRequest) -> AnalysisOutcome:
        per_size = l1_terms_report(self.trajectory, req.sizes, self.kernels)
        bounds = [b for reports in per_size.values() for b in reports]
        return AnalysisOutcome(req.report, bounds=bounds, payload={"sizes": req.sizes})

    def superlinear(self, req: SuperlinearRequest) -> AnalysisOutcome:
        traj = self.trajectory
        theta = ThetaProfile.from_descriptor(req.theta)
        psi, constant = psi_for_trajectory(
            traj, self.kernels.coag, theta, req.lam, req.probe_range
        )
        report = superlinear_report(traj, psi, constant.details["C_emp"])
        return AnalysisOutcome(
            req.report,
            bounds=[report],
            payload={"psi_constant": constant},
            frames={
                "superlinear": moments_frame(
                    [superlinear_series(traj, psi), mass(traj)]
                )
            },
        )

    def log_moment(self, req: LogMomentRequest) -> AnalysisOutcome:
        return AnalysisOutcome(
            req.report, bounds=[log_moment_report(self.trajectory, req.constant)]
        )

    def tightness(self, req: TightnessRequest) -> AnalysisOutcome:
        result = tightness_diagnostic(self.trajectory, req.k)
        failed = (
            req.expect_decreasing is not None
            and result.decreasing != req.expect_decreasing
        )
        if failed:
            logger.warning(
                f"⚠️ tightness deviations decreasing={result.decreasing}, "
                f"expected {req.expect_decreasing}"
            )
        return AnalysisOutcome(
            req.report,
            payload=result.summary(),
            frames={"tightness": moments_frame(result.series.values())},
            failed=failed,
        )

    def regularity(self, req: RegularityRequest) -> AnalysisOutcome:
        traj = self.trajectory
        if req.p != traj.lp_exponent:
            raise ValueError(
                f"run integrated L^{traj.lp_exponent:g}; one exponent per scenario"
            )
        bounds = list(regularity_report(traj).values())
        return AnalysisOutcome(req.report, bounds=bounds)

    # -- scans and coefficient checks ---------------------------------------

    def gelation(self, req: GelationScanRequest) -> AnalysisOutcome:
        result = gelation_scan(self.cfg, req.sizes, n_jobs=self.n_jobs)
        failed = req.expect is not None and result.verdict != req.expect
        if failed:
            logger.warning(
                f"⚠️ gelation verdict {result.verdict.value}, "
                f"expected {req.expect.value}"
            )
        frame = pd.DataFrame([row.model_dump() for row in result.rows])
        return AnalysisOutcome(
            req.report,
            payload={"scan": result, "expect": req.expect},
            frames={"gelation": frame},
            failed=failed,
        )

    def structure(self, req: StructureRequest) -> AnalysisOutcome:
        report = validate_structure(self.kernels, self.cfg.n)
        return AnalysisOutcome(
            req.report, payload={"validation": report}, failed=not report.valid
        )

    def sublinearity(self, req: SublinearityRequest) -> AnalysisOutcome:
        trends = [sublinearity_trend(self.kernels, i, req.horizon) for i in req.sizes]
        return AnalysisOutcome(req.report, payload={"trends": trends})

    def theta_domination(self, req: ThetaDominationRequest) -> AnalysisOutcome:
        theta = ThetaProfile.from_descriptor(req.theta)
        report = check_theta_domination(self.kernels.coag, theta, req.probe_range)
        return AnalysisOutcome(
            req.report,
            bounds=[report],
            payload={"theta_violations": theta.validate()},
        )

    def psi_construction(self, req: PsiConstructionRequest) -> AnalysisOutcome:
        theta = ThetaProfile.from_descriptor(req.theta)
        length = max(req.length, 2 * req.probe_range)
        traj = self.trajectory if req.lam.source == LambdaSource.INITIAL_DATA else None
        lam = lambda_for(req.lam, 2 * length, traj)
        psi = build_psi(theta, lam, length)
        prov = psi.provenance
        values = psi.head(length)

        def cap(formula: str, excess: np.ndarray) -> BoundReport:
            worst = int(np.argmax(excess))
            return BoundReport.evaluate(
                formula=formula,
                measured=float(excess[worst]),
                bound=0.0,
                details={"argmax": worst + 1, "n": length},
            )

        increments = prov["increments"]
        bounds = [
            cap("xi_i <= mu_i", increments - prov["increment_cap"]),
            cap("psi_i <= lambda_i", values - prov["lambda_cap"]),
            cap("psi_i <= 1/theta(sqrt(i/2))", values - prov["theta_cap"]),
            empirical_psi_constant(self.kernels.coag, psi, req.probe_range),
        ]
        bounds.extend(psi_case_bounds(psi, theta, req.probe_range).values())
        return AnalysisOutcome(
            req.report,
            bounds=bounds,
            payload={"bounded": prov["bounded"], "psi_n": float(values[-1])},
            frames={"psi": sequence_frame(psi), "lambda": sequence_frame(lam)},
        )


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def output_dir_for(
    scenario: Scenario, out_root: Optional[Union[str, Path]] = None
) -> Path:
    """
    Run directory for ``scenario``.

    The root is ``out_root`` (``--output``), else COAGFRAG_OUTPUT_DIR, else the
    scenario's ``output_dir``, else ``./runs``.
    """
    root = out_root or OUTPUT_DIR or scenario.output_dir or DEFAULT_OUTPUT_DIR
    return Path(root) / scenario.name


def format_table(outcomes: list[AnalysisOutcome]) -> str:
    header = f"{'report':<18} {'status':<6} {'measured':>13} {'bound':>13}  formula"
    lines = [header, "-" * len(header)]
    for outcome in outcomes:
        if outcome.error:
            lines.append(f"{outcome.report:<18} {'error':<6} {outcome.error}")
        for b in outcome.bounds:
            lines.append(
                f"{outcome.report:<18} {b.status.value:<6} {b.measured:>13.6g} "
                f"{b.bound:>13.6g}  {b.formula}"
            )
        if not outcome.bounds and not outcome.error:
            status = "ok" if outcome.ok else "fail"
            lines.append(f"{outcome.report:<18} {status:<6}")
    return "\n".join(lines)


def execute(
    scenario: Scenario,
    out_root: Optional[Union[str, Path]] = None,
    n_jobs: Optional[int] = None,
) -> int:
    """
    Run a scenario and write its artifacts.

    Returns:
        0 if every bound is Pass or Flag and no analysis failed, 1 on a
        failed bound or expectation, 2 if the simulation itself aborted
    """
    out_dir = output_dir_for(scenario, out_root)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    manifest: dict[str, Any] = {
        "scenario": scenario.name,
        "description": scenario.description,
        "effective": scenario,
        "status": "running",
    }
    write_json(out_dir / "manifest.json", manifest)

    try:
        runner = ScenarioRunner(scenario, out_dir, n_jobs=n_jobs)
    except KernelTableError as e:
        logger.error(f"❌ {e}")
        manifest.update(status="error", error=str(e))
        write_json(out_dir / "manifest.json", manifest)
        return EXIT_RUN_ERROR

    outcomes: list[AnalysisOutcome] = []
    try:
        if runner.needs_run:
            runner.trajectory
        for index, request in enumerate(scenario.analyses):
            outcome = runner.analyze(request)
            outcomes.append(outcome)
            report_path = out_dir / "reports" / f"{index:02d}_{request.report}.json"
            write_json(report_path, outcome.to_json())
            for name, frame in outcome.frames.items():
                write_csv(out_dir / "series" / f"{name}.csv", frame)
    except (StiffnessError, NonFiniteStateError) as e:
        if e.trajectory is not None:
            write_trajectory(out_dir, e.trajectory)
        diagnostic = {
            "error": type(e).__name__,
            "message": str(e),
            "step": e.step,
            "t": e.t,
        }
        write_json(out_dir / "reports" / "error.json", diagnostic)
        manifest.update(status="error", error=diagnostic)
        write_json(out_dir / "manifest.json", manifest)
        print(
            f"error: {type(e).__name__} at step {e.step} (t={e.t:g}): {e}",
            file=sys.stderr,
        )
        return EXIT_RUN_ERROR

    table = format_table(outcomes)
    print(table)
    failed = [o.report for o in outcomes if not o.ok]
    flagged = sum(b.status == BoundStatus.FLAG for o in outcomes for b in o.bounds)
    manifest.update(
        status="failed" if failed else "passed",
        failed_reports=failed,
        flagged_bounds=flagged,
        elapsed_seconds=round(time.perf_counter() - started, 3),
    )
    write_json(out_dir / "manifest.json", manifest)
    logger.info(
        f"✅ scenario '{scenario.name}': {len(outcomes)} report(s), "
        f"{len(failed)} failed, {flagged} flagged -> {out_dir}"
    )
    return EXIT_FAILED_BOUND if failed else EXIT_OK
