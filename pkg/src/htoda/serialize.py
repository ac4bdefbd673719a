"""CSV/JSON output with whole-file atomic writes and value-preserving floats."""

from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .dynamics import SeparableHamiltonian, Trajectory
from .errors import GridError

FLOAT_FMT = "%.17g"


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(columns: list[str], data: np.ndarray) -> str:
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[1] != len(columns):
        raise ValueError(f"{len(columns)} column names for {data.shape[1]} columns")
    buf = io.StringIO()
    np.savetxt(buf, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(columns), comments="")
    return buf.getvalue()


def write_csv(path, columns: list[str], data: np.ndarray) -> Path:
    return atomic_write_text(path, csv_text(columns, data))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2) + "\n")


def trajectory_columns(n: int) -> list[str]:
    cols = ["t"]
    for name in ("q", "p", "qstar", "pstar"):
        cols += [f"{name}_{i + 1}" for i in range(n)]
    return cols


def trajectory_table(traj: Trajectory) -> np.ndarray:
    return np.column_stack([traj.t, traj.q, traj.p, traj.q_star, traj.p_star])


def write_trajectory(path, traj: Trajectory) -> Path:
    return write_csv(path, trajectory_columns(traj.n), trajectory_table(traj))


def read_trajectory(path, h: SeparableHamiltonian, dt: float) -> Trajectory:
    """Rebuild a trajectory from CSV; ``dt`` comes from the scenario, the time column must agree with it."""
    header, data = read_csv(path)
    n = h.n
    if header != trajectory_columns(n):
        raise GridError(f"{path}: header does not describe an n={n} trajectory")
    t = data[:, 0]
    t0 = float(t[0])
    expected = t0 + dt * np.arange(t.size)
    if not np.allclose(t, expected, rtol=1e-12, atol=1e-12 * abs(dt) * t.size):
        raise GridError(f"{path}: time column is not a uniform grid with dt={dt}")
    q = np.ascontiguousarray(data[:, 1 : 1 + n])
    p = np.ascontiguousarray(data[:, 1 + n : 1 + 2 * n])
    return Trajectory(t0, dt, q, p, h)


def series_columns(k: int) -> list[str]:
    return ["t"] + [f"r_{i + 1}" for i in range(k)]
