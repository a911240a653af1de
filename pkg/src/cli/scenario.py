"""
Scenario files: YAML parsed with ``yaml.safe_load`` and validated into
``src.models.Scenario``. Validation errors are reported with the dotted key
and the line of the offending node, found by composing the same document.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import yaml
from pydantic import ValidationError

from src.models import DualityRequest, Scenario

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"
DUALITY_MAX_STRIDE = 10

# relative table paths are resolved against the scenario file
TABLE_KEYS = (
    ("simulation", "kernel", "table"),
    ("simulation", "fragmentation", "table"),
    ("simulation", "collision", "table"),
    ("simulation", "collision", "kernel", "table"),
)


@dataclass(frozen=True)
class Diagnostic:
    key: str
    line: Optional[int]
    reason: str

    def __str__(self) -> str:
        where = f"line {self.line}" if self.line is not None else "?"
        return f"{self.key} ({where}): {self.reason}"


class ScenarioError(Exception):
    """Exception raised when a scenario file cannot be parsed or validated."""

    def __init__(self, path: Union[str, Path], diagnostics: list[Diagnostic]):
        self.path = str(path)
        self.diagnostics = diagnostics
        lines = "\n".join(f"  {d}" for d in diagnostics)
        super().__init__(f"invalid scenario {self.path}:\n{lines}")


def _node_line(root: Optional[yaml.Node], loc: Sequence[Any]) -> Optional[int]:
    """1-based line of the node at ``loc``; the deepest existing node otherwise."""
    node = root
    if node is None:
        return None
    line = node.start_mark.line + 1
    for part in loc:
        if isinstance(node, yaml.MappingNode) and isinstance(part, str):
            match = [(k, v) for k, v in node.value if k.value == part]
            if not match:
                # discriminator tags of tagged unions are not document keys
                continue
            key, node = match[0]
            line = key.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int):
            if part >= len(node.value):
                break
            node = node.value[part]
            line = node.start_mark.line + 1
        else:
            break
    return line


def _key(loc: Sequence[Any]) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def _resolve_tables(data: dict, base: Path) -> None:
    for keys in TABLE_KEYS:
        node = data
        for key in keys[:-1]:
            node = node.get(key) if isinstance(node, dict) else None
        if isinstance(node, dict) and isinstance(node.get(keys[-1]), str):
            table = Path(node[keys[-1]])
            if not table.is_absolute():
                node[keys[-1]] = str((base / table).resolve())


def scenario_warnings(
    scenario: Scenario, root: Optional[yaml.Node] = None
) -> list[Diagnostic]:
    """Preconditions of requested reports that the configuration does not meet."""
    warnings = []
    stride = scenario.simulation.time.sample_stride
    wants_duality = any(isinstance(a, DualityRequest) for a in scenario.analyses)
    if wants_duality and stride > DUALITY_MAX_STRIDE:
        loc = ("simulation", "time", "sample_stride")
        warnings.append(
            Diagnostic(
                key=_key(loc),
                line=_node_line(root, loc),
                reason=(
                    f"duality report needs samples at most {DUALITY_MAX_STRIDE} dt "
                    f"apart; stride is {stride} dt"
                ),
            )
        )
    return warnings


def resolve_scenario_path(name: Union[str, Path]) -> Path:
    """A scenario path, or the name of a bundled scenario."""
    path = Path(name)
    if path.exists():
        return path
    bundled = SCENARIO_DIR / f"{path.stem}.yml"
    return bundled if bundled.exists() else path


def parse_scenario(path: Union[str, Path]) -> Scenario:
    """
    Load and validate a scenario file.

    Missing keys take their documented defaults; ``name`` defaults to the
    file stem. Unmet report preconditions are logged as warnings
    (see ``scenario_warnings``).

    Raises:
        ScenarioError: On unreadable files, YAML syntax errors, unknown keys
            or out-of-range values, with one Diagnostic per problem
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioError(path, [Diagnostic("<file>", None, str(e))]) from e

    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        reason = getattr(e, "problem", None) or str(e)
        raise ScenarioError(path, [Diagnostic("<syntax>", line, reason)]) from e

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError(
            path, [Diagnostic("<root>", 1, "top level must be a mapping")]
        )
    data.setdefault("name", path.stem)
    _resolve_tables(data, path.parent)

    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        diagnostics = [
            Diagnostic(
                key=_key(err["loc"]),
                line=_node_line(root, err["loc"]),
                reason=err["msg"],
            )
            for err in e.errors()
        ]
        raise ScenarioError(path, diagnostics) from e

    for w in scenario_warnings(scenario, root):
        logger.warning(f"⚠️ {path.name}: {w}")
    logger.info(f"📥 parsed scenario '{scenario.name}' from {path}")
    return scenario
