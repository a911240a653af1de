"""
Run artifacts: manifest.json, series/*.csv and reports/*.json.

Series go through pandas so CSV output is plain, deterministic text that
plotting tools read directly.
"""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.analysis.moments import MomentSeries
from src.pde.trajectory import Trajectory
from src.sequences.weights import WeightSequence

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json", by_alias=True)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def write_json(path: PathLike, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n")
    return path


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """One row per sample: scalar diagnostics, int c_i and tracked term integrals."""
    columns = {
        "t": traj.times,
        "mass": traj.mass,
        "rho_l2": traj.rho_l2,
        "leaked": traj.leaked,
        "clip_mass": traj.clip_mass,
        "rho_l1_space_time": traj.rho_l1_st,
        "rho_l2sq_space_time": traj.rho_l2sq_st,
        "m_eff_min": traj.m_eff_min,
        "m_eff_max": traj.m_eff_max,
    }
    for i in traj.tracked_sizes:
        columns[f"int_c_{i}"] = traj.size_integrals[:, i - 1]
    for name, values in traj.term_integrals.items():
        for slot, i in enumerate(traj.tracked_sizes):
            columns[f"{name}_{i}"] = values[:, slot]
    return pd.DataFrame(columns)


def size_frame(traj: Trajectory) -> pd.DataFrame:
    """int c_i over time, one column per size."""
    frame = pd.DataFrame(
        traj.size_integrals, columns=[f"c_{i}" for i in range(1, traj.n + 1)]
    )
    frame.insert(0, "t", traj.times)
    return frame


def moments_frame(series: Iterable[MomentSeries]) -> pd.DataFrame:
    """Moment series sharing a time axis, one column each."""
    series = list(series)
    frame = pd.DataFrame({"t": series[0].times})
    for s in series:
        frame[s.name] = s.values
    return frame


def sequence_frame(seq: WeightSequence) -> pd.DataFrame:
    return pd.DataFrame(
        {"i": np.arange(1, seq.n + 1), seq.kind.value: seq.values[1:]}
    )


def write_csv(path: PathLike, frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    logger.debug(f"wrote {path} ({len(frame)} rows)")
    return path


def write_trajectory(out_dir: PathLike, traj: Trajectory) -> list[Path]:
    out_dir = Path(out_dir)
    return [
        write_csv(out_dir / "series" / "trajectory.csv", trajectory_frame(traj)),
        write_csv(out_dir / "series" / "sizes.csv", size_frame(traj)),
    ]
