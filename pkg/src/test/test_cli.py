"""Tests for scenario parsing, execution and the command line."""

import json
from pathlib import Path

import pytest

from src.cli import ScenarioError, execute, parse_scenario, runner, scenario_warnings
from src.cli.main import main
from src.cli.runner import output_dir_for
from src.cli.scenario import SCENARIO_DIR
from src.models import DualityRequest, MassConservationRequest, TruncationMode

BUNDLED = sorted(SCENARIO_DIR.glob("*.yml"))


def small_scenario(**analyses_and_overrides):
    simulation = {
        "n": 8,
        "time": {"dt": 1.0e-2, "t_final": 0.1, "sample_stride": 2},
    }
    simulation.update(analyses_and_overrides.pop("simulation", {}))
    return {
        "description": "small run",
        "simulation": simulation,
        "analyses": analyses_and_overrides.pop("analyses", []),
    }


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


@pytest.mark.cli
def test_minimal_scenario_takes_defaults(write_scenario):
    path = write_scenario("description: defaults only\n", "tiny.yml")
    scenario = parse_scenario(path)
    assert scenario.name == "tiny"
    assert scenario.analyses == []
    assert scenario.simulation.n == 64
    assert scenario.simulation.truncation == TruncationMode.CONSERVATIVE


@pytest.mark.cli
def test_invalid_dt_names_key_and_line(write_scenario):
    path = write_scenario({"simulation": {"time": {"dt": 0}}})
    with pytest.raises(ScenarioError) as info:
        parse_scenario(path)
    (diagnostic,) = info.value.diagnostics
    assert diagnostic.key == "simulation.time.dt"
    assert diagnostic.line == 3
    assert "simulation.time.dt (line 3)" in str(info.value)


@pytest.mark.cli
def test_unknown_key_is_rejected(write_scenario):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(write_scenario({"simulation": {"bogus": 1}}))
    assert info.value.diagnostics[0].key == "simulation.bogus"
    assert info.value.diagnostics[0].line == 2


@pytest.mark.cli
def test_report_diagnostics_skip_the_union_tag(write_scenario):
    path = write_scenario({"analyses": [{"report": "l1_terms", "sizes": [0]}]})
    with pytest.raises(ScenarioError) as info:
        parse_scenario(path)
    diagnostic = info.value.diagnostics[0]
    assert diagnostic.key == "analyses.0.l1_terms.sizes.0"
    assert diagnostic.line == 4


@pytest.mark.cli
def test_yaml_syntax_error(write_scenario):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(write_scenario("simulation: [1, 2\n"))
    assert info.value.diagnostics[0].key == "<syntax>"


@pytest.mark.cli
def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError):
        parse_scenario(tmp_path / "absent.yml")


@pytest.mark.cli
def test_duality_with_coarse_sampling_warns(write_scenario):
    data = small_scenario(
        simulation={"time": {"dt": 1.0e-3, "t_final": 0.1, "sample_stride": 20}},
        analyses=[{"report": "duality"}],
    )
    scenario = parse_scenario(write_scenario(data))
    assert isinstance(scenario.analyses[0], DualityRequest)
    (warning,) = scenario_warnings(scenario)
    assert warning.key == "simulation.time.sample_stride"


@pytest.mark.cli
@pytest.mark.parametrize("path", BUNDLED, ids=lambda p: p.stem)
def test_bundled_scenarios_parse(path):
    scenario = parse_scenario(path)
    assert scenario.name == path.stem
    assert scenario.description


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


@pytest.mark.cli
def test_execute_writes_artifacts(write_scenario, tmp_path):
    data = small_scenario(
        analyses=[
            {"report": "mass_conservation"},
            {"report": "l1_terms", "sizes": [1, 2]},
        ]
    )
    scenario = parse_scenario(write_scenario(data, "small.yml"))
    assert isinstance(scenario.analyses[0], MassConservationRequest)

    assert execute(scenario, out_root=tmp_path / "runs") == 0
    out = tmp_path / "runs" / "small"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "passed"
    assert manifest["effective"]["simulation"]["n"] == 8
    assert (out / "series" / "trajectory.csv").exists()
    assert (out / "series" / "sizes.csv").exists()
    assert (out / "series" / "mass.csv").exists()
    report = json.loads((out / "reports" / "01_l1_terms.json").read_text())
    assert report["ok"]
    assert len(report["bounds"]) == 8


@pytest.mark.cli
def test_execute_reports_failed_analysis(write_scenario, tmp_path):
    data = small_scenario(analyses=[{"report": "l1_terms", "sizes": [5]}])
    scenario = parse_scenario(write_scenario(data, "untracked.yml"))
    assert execute(scenario, out_root=tmp_path) == 1
    path = tmp_path / "untracked" / "reports" / "00_l1_terms.json"
    report = json.loads(path.read_text())
    assert not report["ok"]
    assert "not tracked" in report["error"]


@pytest.mark.cli
def test_stiff_scenario_exits_with_run_error(tmp_path, capsys):
    code = main(["run", "stiffness-blowup", "--output", str(tmp_path)])
    assert code == 2
    assert "at step 1" in capsys.readouterr().err
    out = tmp_path / "stiffness-blowup"
    error = json.loads((out / "reports" / "error.json").read_text())
    assert error["error"] == "StiffnessError"
    assert error["step"] == 1
    assert error["t"] == 0.0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "error"
    assert (out / "series" / "trajectory.csv").exists()


@pytest.mark.cli
def test_run_with_invalid_scenario(write_scenario, capsys):
    path = write_scenario({"simulation": {"n": 0}})
    assert main(["run", str(path)]) == 2
    assert "simulation.n" in capsys.readouterr().err


@pytest.mark.cli
def test_output_root_priority(write_scenario, tmp_path, monkeypatch):
    data = small_scenario()
    data["output_dir"] = str(tmp_path / "from_file")
    scenario = parse_scenario(write_scenario(data, "rooted.yml"))

    monkeypatch.setattr(runner, "OUTPUT_DIR", None)
    assert output_dir_for(scenario) == tmp_path / "from_file" / "rooted"

    monkeypatch.setattr(runner, "OUTPUT_DIR", str(tmp_path / "env"))
    assert output_dir_for(scenario) == tmp_path / "env" / "rooted"
    assert output_dir_for(scenario, tmp_path / "cli") == tmp_path / "cli" / "rooted"

    monkeypatch.setattr(runner, "OUTPUT_DIR", None)
    bare = scenario.model_copy(update={"output_dir": None})
    assert output_dir_for(bare) == Path("./runs") / "rooted"


# ---------------------------------------------------------------------------
# Bundled acceptance scenarios
# ---------------------------------------------------------------------------


def run_bundled(name: str, out_root: Path) -> tuple[int, dict[str, dict]]:
    """Run a bundled scenario through the CLI; reports keyed by analysis name."""
    code = main(["run", name, "--output", str(out_root)])
    reports = {}
    for path in sorted((out_root / name / "reports").glob("*.json")):
        report = json.loads(path.read_text())
        reports[report.get("report", path.stem)] = report
    return code, reports


def statuses(report: dict) -> list[str]:
    return [bound["status"] for bound in report["bounds"]]


@pytest.mark.cli
@pytest.mark.parametrize("name", ["mass-conservation-sqrt-kernel", "collision-mass"])
def test_conservative_scenarios_keep_mass(name, tmp_path):
    code, reports = run_bundled(name, tmp_path)
    assert code == 0
    (bound,) = reports["mass_conservation"]["bounds"]
    assert bound["status"] == "pass"
    assert bound["measured"] < 1e-8
    assert all(report["ok"] for report in reports.values())


@pytest.mark.cli
@pytest.mark.slow
def test_superlinear_sqrt_scenario_passes(tmp_path):
    code, reports = run_bundled("superlinear-sqrt", tmp_path)
    assert code == 0
    assert set(reports) == {"superlinear", "log_moment", "mass_conservation"}
    assert all(report["ok"] for report in reports.values())


@pytest.mark.cli
@pytest.mark.slow
def test_multiplicative_kernel_scan_is_gelation_consistent(tmp_path):
    code, reports = run_bundled("gelation-multiplicative", tmp_path)
    assert code == 0
    scan = reports["gelation_scan"]["scan"]
    assert scan["verdict"] == "gelation-consistent"
    assert [row["n"] for row in scan["rows"]] == [64, 128, 256, 512]
    assert (tmp_path / "gelation-multiplicative" / "series" / "gelation.csv").exists()


@pytest.mark.cli
@pytest.mark.slow
@pytest.mark.parametrize(
    "name",
    [
        "duality-alternating-t1",
        "duality-alternating-t2",
        "duality-alternating-t4",
        "duality-power-step",
        "duality-collision",
    ],
)
def test_duality_scenarios_pass_with_factor_five(name, tmp_path):
    code, reports = run_bundled(name, tmp_path)
    assert code == 0
    duality = reports["duality"]
    assert statuses(duality) == ["pass", "pass"]
    for bound in duality["bounds"]:
        assert bound["details"]["factor"] == pytest.approx(5.0)
        assert bound["measured"] <= bound["bound"]


@pytest.mark.cli
def test_short_constant_state_flags_only_the_linear_in_time_bound(tmp_path):
    code, reports = run_bundled("duality-constant-state-short", tmp_path)
    assert code == 0
    assert statuses(reports["duality"]) == ["flag", "pass"]
    manifest = json.loads(
        (tmp_path / "duality-constant-state-short" / "manifest.json").read_text()
    )
    assert manifest["flagged_bounds"] == 1


# ---------------------------------------------------------------------------
# Other commands
# ---------------------------------------------------------------------------


@pytest.mark.cli
def test_validate_command(capsys):
    assert main(["validate", "mass-conservation-constant-binary"]) == 0
    assert "0 structural violation(s)" in capsys.readouterr().out


@pytest.mark.cli
def test_list_commands(capsys):
    assert main(["list-kernels"]) == 0
    assert "sqrt_product" in capsys.readouterr().out
    assert main(["list-scenarios"]) == 0
    assert "stiffness-blowup" in capsys.readouterr().out
