"""CSV and JSON emission with atomic writes and lossless round-trips.

All numbers are printed with 17 significant digits so that reading a
file back reproduces the exact IEEE doubles that were written; files
are written to a temporary sibling and renamed into place, and an
existing file is never replaced unless the caller passes force=True.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .field import SpaceTimeGrid, build_grid


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _atomic_write(path: Path, lines: Iterable[str], force: bool) -> None:
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists; pass force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _node_rows(header: str, grid: SpaceTimeGrid, columns: Sequence[np.ndarray],
               comments: Sequence[str] = ()) -> Iterable[str]:
    # row-major in t then x, matching the tabulated-scenario reader
    for c in comments:
        yield f"# {c}"
    yield header
    ts = grid.times()
    xs = grid.xs()
    cols = [np.asarray(c, dtype=float) for c in columns]
    for i in range(grid.nt):
        t_str = _fmt(ts[i])
        for j in range(grid.nx):
            cells = [t_str, _fmt(xs[j])]
            cells.extend(_fmt(c[i, j]) for c in cols)
            yield ",".join(cells)


def write_field_csv(path: Path, grid: SpaceTimeGrid, rho: np.ndarray, b: np.ndarray,
                    force: bool = False) -> None:
    _atomic_write(Path(path), _node_rows("t,x,rho,b", grid, [rho, b]), force)


def write_potential_csv(path: Path, grid: SpaceTimeGrid, values: np.ndarray,
                        force: bool = False) -> None:
    _atomic_write(Path(path), _node_rows("t,x,Q", grid, [values]), force)


def write_curve_csv(path: Path, times: np.ndarray, positions: np.ndarray,
                    force: bool = False) -> None:
    def rows():
        yield "t,x"
        for t, x in zip(times, positions):
            yield f"{_fmt(t)},{_fmt(x)}"

    _atomic_write(Path(path), rows(), force)


def write_solution_csv(path: Path, grid: SpaceTimeGrid, rho: np.ndarray, b: np.ndarray,
                       theta: np.ndarray, rho_theta: np.ndarray,
                       oracle_n: int | None = None, force: bool = False) -> None:
    comments = [] if oracle_n is None else [f"oracle_n = {oracle_n}"]
    _atomic_write(
        Path(path),
        _node_rows("t,x,rho,b,theta,rho_theta", grid, [rho, b, theta, rho_theta], comments),
        force,
    )


def write_comparison_csv(path: Path, grid: SpaceTimeGrid, rho: np.ndarray, b: np.ndarray,
                         theta: np.ndarray, rho_theta: np.ndarray,
                         theta_oracle: np.ndarray, rho_theta_oracle: np.ndarray,
                         oracle_n: int, force: bool = False) -> None:
    _atomic_write(
        Path(path),
        _node_rows(
            "t,x,rho,b,theta,rho_theta,theta_oracle,rho_theta_oracle",
            grid,
            [rho, b, theta, rho_theta, theta_oracle, rho_theta_oracle],
            [f"oracle_n = {oracle_n}"],
        ),
        force,
    )


def write_trace_csv(path: Path, times: np.ndarray, tr_brho_left: np.ndarray,
                    tr_brhotheta_left: np.ndarray, tr_brho_right: np.ndarray,
                    tr_brhotheta_right: np.ndarray, force: bool = False) -> None:
    def rows():
        yield "t,tr_brho_left,tr_brhotheta_left,tr_brho_right,tr_brhotheta_right"
        for k in range(len(times)):
            yield ",".join(
                _fmt(v)
                for v in (times[k], tr_brho_left[k], tr_brhotheta_left[k],
                          tr_brho_right[k], tr_brhotheta_right[k])
            )

    _atomic_write(Path(path), rows(), force)


def write_time_trace_csv(path: Path, times: np.ndarray, values: np.ndarray, x: float,
                         force: bool = False) -> None:
    def rows():
        yield f"# x = {_fmt(x)}"
        yield "t,theta"
        for t, v in zip(times, values):
            yield f"{_fmt(t)},{_fmt(v)}"

    _atomic_write(Path(path), rows(), force)


def write_summary_json(path: Path, summary: dict, force: bool = False) -> None:
    text = json.dumps(summary, indent=2, sort_keys=True)
    _atomic_write(Path(path), [text], force)


def read_field_csv(path: Path) -> tuple[SpaceTimeGrid, np.ndarray, np.ndarray]:
    """Read any node CSV carrying at least t,x,rho,b columns back into arrays.

    Accepts field, solution, and comparison files (extra columns are
    ignored); reconstructs the uniform grid from the node coordinates.
    """
    path = Path(path)
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            try:
                rows.append([float(c) for c in line.split(",")])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if header is None or not rows:
        raise ValueError(f"{path}: no data rows")
    need = ("t", "x", "rho", "b")
    try:
        idx = {name: header.index(name) for name in need}
    except ValueError:
        raise ValueError(f"{path}: header must contain t,x,rho,b (got {','.join(header)})")
    table = np.asarray(rows, dtype=float)
    if table.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    ts = np.unique(table[:, idx["t"]])
    xs = np.unique(table[:, idx["x"]])
    nt, nx = ts.size, xs.size
    if nt * nx != table.shape[0]:
        raise ValueError(f"{path}: nodes do not form a full lattice")
    grid = build_grid(float(ts[-1]), float(xs[0]), float(xs[-1]), nt, nx)
    if ts[0] != 0.0 or np.max(np.abs(ts - grid.times())) > 1e-9 * max(1.0, grid.t_max):
        raise ValueError(f"{path}: time levels are not uniform from 0")
    if np.max(np.abs(xs - grid.xs())) > 1e-9 * max(1.0, abs(grid.x_max - grid.x_min)):
        raise ValueError(f"{path}: abscissas are not uniform")
    # rows arrive row-major (t outer, x inner); tolerate any order by sorting
    order = np.lexsort((table[:, idx["x"]], table[:, idx["t"]]))
    table = table[order]
    rho = table[:, idx["rho"]].reshape(nt, nx)
    b = table[:, idx["b"]].reshape(nt, nx)
    return grid, rho, b


def read_column_csv(path: Path) -> dict[str, np.ndarray]:
    """Read any of the emitted CSVs into named columns (comments skipped)."""
    path = Path(path)
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            try:
                rows.append([float(c) for c in line.split(",")])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if header is None:
        raise ValueError(f"{path}: missing header")
    table = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
    return {name: table[:, k] for k, name in enumerate(header)}
