"""Command-line front end: runs, verification, oracle comparison, traces.

A run is described by a RunConfig assembled from an optional flat
key=value config file plus flags (flags win).  All artifacts go to the
configured output directory as CSV/JSON with deterministic bytes, and
nothing is overwritten unless --force is given.

Exit codes: 0 success, 1 verification/comparison failure, 2 usage or
config error, 3 numerical construction failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import csvio
from .field import (
    BoundaryData,
    ConstructionError,
    Scenario,
    build_grid,
    builtin_scenarios,
    sample_scenario,
    tabulated_scenario,
)
from .oracle import oracle_solution
from .potential import boundary_time_derivative, build_potential
from .solver import bv_in_space_check, check_boundary_condition, solve, theta_time_trace
from .verification import run_criteria


class UsageError(Exception):
    """Bad flags or config: reported on stderr with exit code 2."""


@dataclass
class RunConfig:
    command: str
    scenario: str = "constant-drift"
    nt: int = 257
    nx: int = 257
    mollifier_n: int | None = None
    out_dir: Path = Path("transport1d-out")
    only: str | None = None
    jobs: int = 1
    force: bool = False
    x: float | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    data_constants: dict[str, float] = field(default_factory=dict)


_INT_KEYS = {"nt", "nx", "mollifier_n", "jobs"}
_FLOAT_KEYS = {"x", "theta_init", "theta_left", "theta_right"}
_STR_KEYS = {"scenario", "out", "only"}
_BOOL_KEYS = {"force"}


def _parse_config_file(path: Path) -> dict:
    """Flat key = value lines; # comments; tol.<name> collects overrides."""
    values: dict = {"tolerances": {}, "data_constants": {}}
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, _, val = (s.strip() for s in line.partition("="))
        try:
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _STR_KEYS:
                values[key] = val
            elif key in _BOOL_KEYS:
                if val.lower() not in ("true", "false", "0", "1"):
                    raise ValueError("expected a boolean")
                values[key] = val.lower() in ("true", "1")
            elif key in _FLOAT_KEYS:
                if key == "x":
                    values[key] = float(val)
                else:
                    values["data_constants"][key] = float(val)
            elif key.startswith("tol."):
                values["tolerances"][key[4:]] = float(val)
            else:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        except UsageError:
            raise
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: key {key!r}: {exc}") from None
    return values


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    shared.add_argument("--config", type=Path, help="flat key = value config file")
    shared.add_argument("--scenario", help="builtin label, 'all', or a field CSV path")
    shared.add_argument("--nx", type=int, help="abscissa count")
    shared.add_argument("--nt", type=int, help="time level count")
    shared.add_argument("--mollifier-n", dest="mollifier_n", type=int,
                        help="largest mollification index for compare")
    shared.add_argument("--out", help="output directory (default $TRANSPORT1D_OUT)")
    shared.add_argument("--only", help="glob over criterion identifiers for verify")
    shared.add_argument("--jobs", type=int, help="parallel scenario runs")
    shared.add_argument("--force", action="store_true", help="allow overwriting outputs")
    shared.add_argument("--x", type=float, help="abscissa for the traces command")
    parser = argparse.ArgumentParser(
        prog="transport1d",
        parents=[shared],
        description="Transport solver for bounded, nearly incompressible velocity fields",
    )
    sub = parser.add_subparsers(dest="command")
    for name, text in (
        ("run", "solve a scenario and emit solution/trace CSVs and a JSON summary"),
        ("verify", "run the acceptance criteria and print a pass/fail table"),
        ("compare", "solve and compare against the mollified reference solver"),
        ("traces", "extract the solution time trace at a fixed abscissa"),
    ):
        sub.add_parser(name, parents=[shared], help=text)
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    ns = _build_parser().parse_args(argv)
    opts = vars(ns)
    command = opts.pop("command", None)
    if command is None:
        raise UsageError("a command is required: run, verify, compare, or traces")
    merged: dict = {}
    config_path = opts.pop("config", None)
    if config_path is not None:
        merged.update(_parse_config_file(Path(config_path)))
    merged.update(opts)

    cfg = RunConfig(command=command)
    cfg.scenario = str(merged.get("scenario", cfg.scenario))
    for key in ("nt", "nx"):
        value = int(merged.get(key, getattr(cfg, key)))
        if value < 2:
            raise UsageError(f"{key} must be >= 2")
        setattr(cfg, key, value)
    if "mollifier_n" in merged:
        cfg.mollifier_n = int(merged["mollifier_n"])
        if cfg.mollifier_n < 1:
            raise UsageError("mollifier_n must be >= 1")
    out = merged.get("out", os.environ.get("TRANSPORT1D_OUT", str(cfg.out_dir)))
    cfg.out_dir = Path(out)
    cfg.only = merged.get("only")
    cfg.jobs = int(merged.get("jobs", 1))
    if cfg.jobs < 1:
        raise UsageError("jobs must be >= 1")
    cfg.force = bool(merged.get("force", False))
    if "x" in merged:
        cfg.x = float(merged["x"])
    cfg.tolerances = dict(merged.get("tolerances", {}))
    cfg.data_constants = dict(merged.get("data_constants", {}))
    return cfg


def _resolve_scenarios(cfg: RunConfig) -> list[Scenario]:
    table = builtin_scenarios()
    if cfg.scenario == "all":
        return list(table.values())
    if cfg.scenario in table:
        return [table[cfg.scenario]]
    path = Path(cfg.scenario)
    if path.exists():
        grid, rho, b = csvio.read_field_csv(path)
        consts = cfg.data_constants
        data = BoundaryData(
            theta_init=lambda x: np.full_like(np.asarray(x, dtype=float),
                                              consts.get("theta_init", 1.0)),
            theta_left=lambda t: np.full_like(np.asarray(t, dtype=float),
                                              consts.get("theta_left", 1.0)),
            theta_right=lambda t: np.full_like(np.asarray(t, dtype=float),
                                               consts.get("theta_right", 1.0)),
            t_max=grid.t_max, x_min=grid.x_min, x_max=grid.x_max,
        )
        return [tabulated_scenario(grid, rho, b, data, label=path.stem)]
    raise UsageError(
        f"unknown scenario {cfg.scenario!r}; builtins: {', '.join(sorted(table))}"
    )


def _solve_scenario(sc: Scenario, cfg: RunConfig):
    g = build_grid(sc.t_max, sc.x_min, sc.x_max, cfg.nt, cfg.nx)
    f = sample_scenario(sc, g)
    P = build_potential(f)
    sol = solve(P, f, sc.data)
    P_theta = build_potential(f, weight=sol.theta)
    return g, f, P, sol, P_theta


def _write_run_outputs(sc: Scenario, cfg: RunConfig) -> dict:
    g, f, P, sol, P_theta = _solve_scenario(sc, cfg)
    base = cfg.out_dir / sc.label
    csvio.write_solution_csv(f"{base}_solution.csv", g, f.rho, f.b, sol.theta,
                             sol.rho_theta, force=cfg.force)
    mids = g.times()[:-1] + 0.5 * g.dt
    tr0_l = boundary_time_derivative(P, "left")
    tr0_r = -boundary_time_derivative(P, "right")
    tr1_l = boundary_time_derivative(P_theta, "left")
    tr1_r = -boundary_time_derivative(P_theta, "right")
    csvio.write_trace_csv(f"{base}_traces.csv", mids, tr0_l, tr1_l, tr0_r, tr1_r,
                          force=cfg.force)
    bc_left = check_boundary_condition(sol, P, P_theta, sc.data, "left")
    bc_right = check_boundary_condition(sol, P, P_theta, sc.data, "right")
    summary = {
        "linf_bound": sol.linf_bound,
        "max_bv_space": bv_in_space_check(sol, sc.data).max_tv,
        "bc_mismatch_left": bc_left.mismatch,
        "bc_mismatch_right": bc_right.mismatch,
        "potential_consistency": float(np.max(np.abs(sol.q_tilde.values - P_theta.values))),
    }
    csvio.write_summary_json(f"{base}_summary.json", summary, force=cfg.force)
    return summary


def command_run(cfg: RunConfig) -> int:
    scenarios = _resolve_scenarios(cfg)
    if cfg.jobs > 1 and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            summaries = list(pool.map(lambda sc: _write_run_outputs(sc, cfg), scenarios))
    else:
        summaries = [_write_run_outputs(sc, cfg) for sc in scenarios]
    for sc, summary in zip(scenarios, summaries):
        print(f"{sc.label}: potential_consistency {summary['potential_consistency']:.3e}, "
              f"bc mismatch ({summary['bc_mismatch_left']:.3e}, "
              f"{summary['bc_mismatch_right']:.3e}) -> {cfg.out_dir}")
    return 0


def command_verify(cfg: RunConfig) -> int:
    results = run_criteria(cfg.only)
    if not results:
        raise UsageError(f"no criteria match {cfg.only!r}")
    width = max(len(r.cid) for r in results)
    for r in results:
        print(f"{r.cid:<{width}s}  {'PASS' if r.passed else 'FAIL'}  "
              f"{r.seconds:6.1f}s  {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def command_compare(cfg: RunConfig) -> int:
    if cfg.mollifier_n is None:
        raise UsageError("compare requires --mollifier-n")
    scenarios = _resolve_scenarios(cfg)
    indices = []
    n = 4
    while n < cfg.mollifier_n:
        indices.append(n)
        n *= 2
    indices.append(cfg.mollifier_n)
    all_ok = True
    for sc in scenarios:
        g, f, P, sol, _ = _solve_scenario(sc, cfg)
        target = f.rho * sol.theta
        mass = float(np.sum(np.abs(target)) * g.dt * g.dx)
        dists = []
        for k in indices:
            mp, theta_n, rho_sm = oracle_solution(f, P, sc.data, k)
            dists.append(float(np.sum(np.abs(rho_sm * theta_n - target)) * g.dt * g.dx) / mass)
        csvio.write_comparison_csv(
            cfg.out_dir / f"{sc.label}_compare_n{indices[-1]}.csv",
            g, f.rho, f.b, sol.theta, target, theta_n, rho_sm * theta_n,
            oracle_n=indices[-1], force=cfg.force,
        )
        monotone = all(dists[k + 1] <= dists[k] + 1e-12 for k in range(len(dists) - 1))
        tol = cfg.tolerances.get("oracle_rel", sc.oracle_rel_tol)
        ok = monotone and dists[-1] <= tol
        all_ok = all_ok and ok
        pretty = ", ".join(f"n={k}: {d:.4f}" for k, d in zip(indices, dists))
        print(f"{sc.label}: {pretty} ({'ok' if ok else 'not converged'}, budget {tol:.2f})")
    return 0 if all_ok else 1


def command_traces(cfg: RunConfig) -> int:
    if cfg.x is None:
        raise UsageError("traces requires --x")
    scenarios = _resolve_scenarios(cfg)
    for sc in scenarios:
        g, f, P, sol, P_theta = _solve_scenario(sc, cfg)
        trace = theta_time_trace(sol, P_theta, cfg.x)
        mids = g.times()[:-1] + 0.5 * g.dt
        out = cfg.out_dir / f"{sc.label}_trace_x{csvio._fmt(cfg.x)}.csv"
        csvio.write_time_trace_csv(out, mids, trace, cfg.x, force=cfg.force)
        print(f"{sc.label}: trace at x = {cfg.x} -> {out}")
    return 0


_COMMANDS = {
    "run": command_run,
    "verify": command_verify,
    "compare": command_compare,
    "traces": command_traces,
}


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return _COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
