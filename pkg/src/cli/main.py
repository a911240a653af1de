#!/usr/bin/env python3
"""coagfrag command line: run and validate scenario files."""

import argparse
import logging
import sys
from typing import Optional, Sequence

import yaml

from src.cli.runner import EXIT_FAILED_BOUND, EXIT_OK, EXIT_RUN_ERROR, execute
from src.cli.scenario import (
    SCENARIO_DIR,
    ScenarioError,
    parse_scenario,
    resolve_scenario_path,
    scenario_warnings,
)
from src.kernels import FAMILY_FORMULAS, KernelSet, KernelTableError, validate_structure
from src.settings import LOG_LEVEL

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coagfrag",
        description="Coagulation-fragmentation with size-dependent diffusion",
    )
    parser.add_argument("--log-level", default=LOG_LEVEL, help="Logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a scenario and write its artifacts")
    run.add_argument("scenario", help="Scenario file or bundled scenario name")
    run.add_argument("--output", default=None, help="Output root (overrides the file)")
    run.add_argument(
        "--jobs", type=int, default=None, help="Workers for gelation scans"
    )

    validate = sub.add_parser("validate", help="Validate a scenario without running it")
    validate.add_argument("scenario", help="Scenario file or bundled scenario name")

    sub.add_parser("list-kernels", help="List coagulation kernel families")
    sub.add_parser("list-scenarios", help="List bundled scenarios")
    return parser


def _load(name: str):
    try:
        return parse_scenario(resolve_scenario_path(name))
    except ScenarioError as e:
        print(str(e), file=sys.stderr)
        return None


def cmd_run(args) -> int:
    scenario = _load(args.scenario)
    if scenario is None:
        return EXIT_RUN_ERROR
    return execute(scenario, out_root=args.output, n_jobs=args.jobs)


def cmd_validate(args) -> int:
    scenario = _load(args.scenario)
    if scenario is None:
        return EXIT_FAILED_BOUND
    for warning in scenario_warnings(scenario):
        print(f"warning: {warning}")
    try:
        kernels = KernelSet.from_config(scenario.simulation)
    except KernelTableError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED_BOUND
    report = validate_structure(kernels, scenario.simulation.n)
    for v in report.violations:
        print(f"violation: {v.rule} at {v.indices}: {v.detail}")
    print(
        f"{scenario.name}: {len(scenario.analyses)} analyses, "
        f"{len(report.violations)} structural violation(s)"
    )
    return EXIT_OK if report.valid else EXIT_FAILED_BOUND


def cmd_list_kernels(args) -> int:
    for family, formula in FAMILY_FORMULAS.items():
        print(f"{family.value:<16} a_ij = {formula}")
    return EXIT_OK


def cmd_list_scenarios(args) -> int:
    for path in sorted(SCENARIO_DIR.glob("*.yml")):
        with open(path) as f:
            data = yaml.safe_load(f) or {}
        print(f"{path.stem:<36} {data.get('description', '')}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "validate": cmd_validate,
    "list-kernels": cmd_list_kernels,
    "list-scenarios": cmd_list_scenarios,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
