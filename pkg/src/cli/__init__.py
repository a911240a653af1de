"""
Scenario-driven command line: parse YAML scenarios, run simulations and
analyses, write manifest, series and reports.
"""

from src.cli.runner import AnalysisOutcome, ScenarioRunner, execute, format_table
from src.cli.scenario import (
    Diagnostic,
    ScenarioError,
    parse_scenario,
    resolve_scenario_path,
    scenario_warnings,
)

__all__ = [
    "AnalysisOutcome",
    "Diagnostic",
    "ScenarioError",
    "ScenarioRunner",
    "execute",
    "format_table",
    "parse_scenario",
    "resolve_scenario_path",
    "scenario_warnings",
]
