"""Acceptance criteria for the whole construction, one checker per item.

Each checker builds what it needs (solves are cached per grid), measures
the claimed property, and returns a CriterionResult with a one-line
numeric summary.  run_criteria drives any subset by identifier glob and
is the engine behind the command-line `verify` subcommand and the
acceptance test module.
"""

from __future__ import annotations

import fnmatch
import time
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable, Iterable

import numpy as np

from .characteristics import level_curve
from .envelope import (
    envelope_restriction,
    lower_increasing_envelope,
    upper_decreasing_envelope,
)
from .field import (
    BoundaryData,
    FieldPair,
    Scenario,
    SpaceTimeGrid,
    build_grid,
    builtin_scenarios,
    oscillation_displacement,
    sample_scenario,
    total_variation,
)
from .oracle import oracle_solution
from .potential import Potential, boundary_time_derivative, build_potential
from .solver import (
    Solution,
    bv_in_space_check,
    check_boundary_condition,
    comparison_check,
    renormalized_trace_check,
    solve,
    solve_at_column,
    theta_time_trace,
)

CRITERIA_ORDER = (
    "ENV-ORACLE",
    "CHAR-PROPS",
    "SOL-LINF",
    "SOL-UNIQ",
    "SOL-BC",
    "SOL-CMP",
    "BV-SPACE",
    "BV-TIME",
    "CEX-DIVERGE",
    "TRACE-RENORM",
    "ORACLE-CONV",
    "TRACE-SIGN",
)

SMOOTH_SCENARIOS = ("constant-drift", "vacuum-patch")


@dataclass(frozen=True)
class CriterionResult:
    cid: str
    passed: bool
    detail: str
    seconds: float


class Workspace:
    """Caches sampled fields, potentials, and solutions per (label, nt, nx)."""

    def __init__(self) -> None:
        self.scenarios = builtin_scenarios()
        self._cache: dict[tuple[str, int, int], dict] = {}

    def context(self, label: str, nt: int, nx: int) -> dict:
        key = (label, nt, nx)
        if key not in self._cache:
            sc = self.scenarios[label]
            g = build_grid(sc.t_max, sc.x_min, sc.x_max, nt, nx)
            f = sample_scenario(sc, g)
            P = build_potential(f)
            sol = solve(P, f, sc.data)
            P_theta = build_potential(f, weight=sol.theta)
            self._cache[key] = {
                "scenario": sc, "grid": g, "field": f, "potential": P,
                "solution": sol, "weighted": P_theta,
            }
        return self._cache[key]


def _count_digit_sequences(length: int, base: int) -> np.ndarray:
    """All sequences of the given length over {0..base-1}, one per row."""
    grids = np.indices((base,) * length).reshape(length, -1).T
    return grids.astype(float)


def _brute_force_envelopes(F: np.ndarray, base: int, upper: bool) -> np.ndarray:
    """Pointwise-optimal monotone majorants/minorants by full enumeration."""
    length = F.shape[1]
    out = np.full(F.shape, np.inf if upper else -np.inf)
    for comb in combinations_with_replacement(range(base), length):
        g = np.asarray(comb, dtype=float)
        if upper:
            g = g[::-1]  # non-increasing candidates
            ok = np.all(F <= g, axis=1)
            out[ok] = np.minimum(out[ok], g)
        else:
            ok = np.all(F >= g, axis=1)
            out[ok] = np.maximum(out[ok], g)
    return out


def check_env_oracle(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    worst = 0.0
    for length in range(1, 9):
        F = _count_digit_sequences(length, 4)
        bf_up = _brute_force_envelopes(F, 4, upper=True)
        bf_lo = _brute_force_envelopes(F, 4, upper=False)
        up = np.array([upper_decreasing_envelope(row).values for row in F])
        lo = np.array([lower_increasing_envelope(row).values for row in F])
        worst = max(worst, float(np.max(np.abs(up - bf_up))), float(np.max(np.abs(lo - bf_lo))))
        if worst > 0.0:
            break
    dichotomy_ok = True
    restriction_ok = True
    rng = np.random.default_rng(7)
    for _ in range(1000):
        v = rng.normal(size=200)
        env = upper_decreasing_envelope(v)
        # off-contact indices must continue flat to the right
        inner = ~env.contact[:-1]
        if np.any(np.abs(env.values[:-1][inner] - env.values[1:][inner]) > env.tol):
            dichotomy_ok = False
        low = lower_increasing_envelope(v)
        inner = ~low.contact[:-1]
        if np.any(np.abs(low.values[:-1][inner] - low.values[1:][inner]) > low.tol):
            dichotomy_ok = False
        contacts = np.flatnonzero(env.contact)
        k_star = int(rng.choice(contacts))
        tau = int(rng.integers(k_star, 200))
        if not envelope_restriction(v, k_star, tau):
            restriction_ok = False
    passed = worst == 0.0 and dichotomy_ok and restriction_ok
    detail = (f"exhaustive max gap {worst:.1e}, dichotomy {'ok' if dichotomy_ok else 'violated'}, "
              f"restriction {'ok' if restriction_ok else 'violated'}")
    return CriterionResult("ENV-ORACLE", passed, detail, time.time() - t0)


def _interp_rows(values: np.ndarray, positions: np.ndarray, rows: np.ndarray,
                 x_min: float, dx: float) -> np.ndarray:
    """Linear interpolation of values[rows[k], positions[k]] along a curve."""
    nx = values.shape[1]
    fx = np.clip((positions - x_min) / dx, 0.0, nx - 1.0)
    j0 = np.minimum(fx.astype(int), nx - 2)
    w = fx - j0
    return values[rows, j0] * (1.0 - w) + values[rows, j0 + 1] * w


def check_char_props(ws: Workspace, nt: int = 257, nx: int = 257,
                     samples: int = 200) -> CriterionResult:
    """Curve anchoring, cone control in the potential metric, level
    constancy, and base monotonicity on random interior bases.

    Positions inside density flats are interchangeable (same level,
    same transported values), so steps beyond the speed cone are judged
    by the potential increment they carry rather than by raw distance.
    """
    t0 = time.time()
    rng = np.random.default_rng(42)
    worst: dict[str, float] = {"a": 0.0, "b": 0.0, "f": 0.0, "h": 0.0}
    tol_f_used = 0.0
    for label in ws.scenarios:
        ctx = ws.context(label, nt, nx)
        g, f, P = ctx["grid"], ctx["field"], ctx["potential"]
        ts, xs = g.times(), g.xs()
        tol_f = P.lip_x * 2.0 * g.dx + P.lip_t * g.dt
        tol_f_used = max(tol_f_used, tol_f)
        for _ in range(samples):
            i = int(rng.integers(1, g.nt - 1))
            x = float(rng.uniform(g.x_min + g.dx, g.x_max - g.dx))
            c = level_curve(P, f, ts[i], x)
            pos = c.positions
            lo = int(np.ceil(c.t_star / g.dt))
            hi = int(np.floor(c.t_upper / g.dt))
            rows = np.arange(lo, hi + 1)
            qv = _interp_rows(P.values, pos[rows], rows, g.x_min, g.dx)
            worst["f"] = max(worst["f"], float(np.max(np.abs(qv - c.h_bar))) - tol_f)
            steps = np.diff(pos[rows])
            over = np.abs(steps) > f.b_sup * g.dt + 1e-12
            if np.any(over):
                k = rows[:-1][over]
                cone = pos[k] + np.sign(steps[over]) * f.b_sup * g.dt
                q_at = _interp_rows(P.values, pos[k + 1], k + 1, g.x_min, g.dx)
                q_cone = _interp_rows(P.values, cone, k + 1, g.x_min, g.dx)
                worst["a"] = max(worst["a"], float(np.max(np.abs(q_at - q_cone))) - tol_f)
            anchor_q = abs(float(np.interp(x, xs, P.values[i])) - c.h_bar)
            worst["b"] = max(worst["b"], pos[i] - x, anchor_q - tol_f)
            x2 = float(rng.uniform(g.x_min + g.dx, g.x_max - g.dx))
            ca = level_curve(P, f, ts[i], min(x, x2))
            cb = level_curve(P, f, ts[i], max(x, x2))
            worst["h"] = max(worst["h"], float(np.max(ca.positions - cb.positions)))
    passed = all(v <= 1e-9 for v in worst.values())
    detail = ("excess a={a:.1e} b={b:.1e} f={f:.1e} h={h:.1e}".format(**worst)
              + f" (level tol {tol_f_used:.1e})")
    return CriterionResult("CHAR-PROPS", passed, detail, time.time() - t0)


def check_sol_linf(ws: Workspace, resolutions: Iterable[int] = (129, 257, 513)) -> CriterionResult:
    t0 = time.time()
    worst = -np.inf
    for label in ws.scenarios:
        for n in resolutions:
            ctx = ws.context(label, n, n)
            sol = ctx["solution"]
            worst = max(worst, float(np.max(np.abs(sol.theta))) - sol.linf_bound)
    passed = worst <= 1e-10
    return CriterionResult("SOL-LINF", passed, f"max excess over data bound {worst:.2e}",
                           time.time() - t0)


def check_sol_uniq(ws: Workspace, labels: Iterable[str] = ("constant-drift", "positive-b"),
                   resolutions: Iterable[int] = (129, 257, 513)) -> CriterionResult:
    t0 = time.time()
    min_ratio = np.inf
    parts = []
    for label in labels:
        gaps = []
        for n in resolutions:
            ctx = ws.context(label, n, n)
            gap = float(np.max(np.abs(ctx["solution"].q_tilde.values - ctx["weighted"].values)))
            gaps.append(gap)
        ratios = [gaps[k] / gaps[k + 1] for k in range(len(gaps) - 1)]
        min_ratio = min(min_ratio, min(ratios))
        parts.append(f"{label}: " + "->".join(f"{v:.2e}" for v in gaps))
    passed = min_ratio >= 1.5
    return CriterionResult("SOL-UNIQ", passed,
                           f"min contraction {min_ratio:.2f} ({'; '.join(parts)})",
                           time.time() - t0)


def check_sol_bc(ws: Workspace, nt: int = 257, nx: int = 257) -> CriterionResult:
    t0 = time.time()
    worst_rel = 0.0
    parts = []
    for label in SMOOTH_SCENARIOS:
        ctx = ws.context(label, nt, nx)
        g, f, sc = ctx["grid"], ctx["field"], ctx["scenario"]
        tol = 10.0 * (g.dx + g.dt) * g.t_max * f.b_sup
        for side in ("left", "right"):
            rep = check_boundary_condition(ctx["solution"], ctx["potential"],
                                           ctx["weighted"], sc.data, side)
            worst_rel = max(worst_rel, rep.mismatch / tol)
            parts.append(f"{label}/{side} {rep.mismatch:.1e}")
    passed = worst_rel <= 1.0
    return CriterionResult("SOL-BC", passed,
                           f"worst mismatch at {worst_rel:.2f} of budget ({'; '.join(parts)})",
                           time.time() - t0)


def _shifted_data(data: BoundaryData, offset: float) -> BoundaryData:
    return BoundaryData(
        theta_init=lambda x: data.initial_at(x) + offset,
        theta_left=lambda t: data.left_at(t) + offset,
        theta_right=lambda t: data.right_at(t) + offset,
        t_max=data.t_max, x_min=data.x_min, x_max=data.x_max,
    )


def _constant_data(like: BoundaryData, value: float) -> BoundaryData:
    return BoundaryData(
        theta_init=lambda x: np.full_like(np.asarray(x, dtype=float), value),
        theta_left=lambda t: np.full_like(np.asarray(t, dtype=float), value),
        theta_right=lambda t: np.full_like(np.asarray(t, dtype=float), value),
        t_max=like.t_max, x_min=like.x_min, x_max=like.x_max,
    )


def check_sol_cmp(ws: Workspace, nt: int = 257, nx: int = 257) -> CriterionResult:
    """Ordered data pairs: identical, shifted by one, and sign data
    against the constant lower bound."""
    t0 = time.time()
    gaps = []
    cd = ws.context("constant-drift", nt, nx)
    f, P, data = cd["field"], cd["potential"], cd["scenario"].data
    sol_b = cd["solution"]
    rep = comparison_check(sol_b, sol_b, f)
    gaps.append(("identical", rep))
    sol_a = solve(P, f, _shifted_data(data, 1.0))
    rep = comparison_check(sol_a, sol_b, f)
    gaps.append(("shifted", rep))
    oc = ws.context("oscillating-sign", nt, nx)
    sol_low = solve(oc["potential"], oc["field"], _constant_data(oc["scenario"].data, -1.0))
    rep = comparison_check(oc["solution"], sol_low, oc["field"])
    gaps.append(("sign-vs-floor", rep))
    passed = all(r.passed for _, r in gaps)
    detail = "; ".join(f"{name} min {r.min_weighted_gap:.2e}" for name, r in gaps)
    return CriterionResult("SOL-CMP", passed, detail, time.time() - t0)


def check_bv_space(ws: Workspace, labels: Iterable[str] = ("positive-b", "oscillating-sign"),
                   nt: int = 513, nx: int = 513) -> CriterionResult:
    t0 = time.time()
    parts = []
    passed = True
    for label in labels:
        ctx = ws.context(label, nt, nx)
        rep = bv_in_space_check(ctx["solution"], ctx["scenario"].data)
        passed = passed and rep.passed
        parts.append(f"{label} max TV {rep.max_tv:.3f} vs {rep.bound:.3f}")
    return CriterionResult("BV-SPACE", passed, "; ".join(parts), time.time() - t0)


def check_bv_time(ws: Workspace, nt: int = 257, nx: int = 257) -> CriterionResult:
    t0 = time.time()
    ctx = ws.context("positive-b", nt, nx)
    sc, g, sol = ctx["scenario"], ctx["grid"], ctx["solution"]
    data = sc.data
    budget = data.tv_init() + data.tv_left() + abs(data.left_initial_limit() - data.init_left_limit())
    lo_data = min(float(np.min(data.initial_at(g.xs()))), float(np.min(data.left_at(g.times()))))
    hi_data = max(float(np.max(data.initial_at(g.xs()))), float(np.max(data.left_at(g.times()))))
    worst_tv = 0.0
    worst_range = 0.0
    quarter = 0.25 * (g.x_max - g.x_min)
    for x in (g.x_min + quarter, g.x_min + 2 * quarter, g.x_min + 3 * quarter):
        trace = theta_time_trace(sol, ctx["weighted"], x)
        worst_tv = max(worst_tv, total_variation(trace))
        worst_range = max(worst_range, lo_data - float(np.min(trace)),
                          float(np.max(trace)) - hi_data)
    passed = worst_tv <= 1.05 * budget and worst_range <= 1e-8
    detail = (f"max TV {worst_tv:.4f} vs budget {budget:.4f} (+5%), "
              f"range excess {worst_range:.1e}")
    return CriterionResult("BV-TIME", passed, detail, time.time() - t0)


def check_cex_diverge(ws: Workspace, n: int = 4097) -> CriterionResult:
    t0 = time.time()
    sc = ws.scenarios["oscillating-sign"]
    g = build_grid(sc.t_max, sc.x_min, sc.x_max, n, n)
    f = sample_scenario(sc, g)
    P = build_potential(f)
    col = solve_at_column(P, f, sc.data, 0.0)
    ts = g.times()
    w = np.sign(-oscillation_displacement(ts))
    w[w == 0.0] = 1.0
    win = ts <= 0.95
    l1 = float(np.sum(np.abs(col[win] - w[win])) * g.dt)
    tol = 8.0 * g.dx * (1.0 + f.b_sup)
    tv_ok = True
    tvs = []
    for K in (8, 16, 32):
        tv = total_variation(col[ts <= 1.0 - 1.0 / K])
        tvs.append(f"K={K}: {tv:.0f}/{2 * (K - 2)}")
        tv_ok = tv_ok and tv >= 2.0 * (K - 2)
    seconds = time.time() - t0
    passed = l1 <= tol and tv_ok and seconds < 60.0
    detail = f"L1 {l1:.1e} vs {tol:.1e}; TV {', '.join(tvs)}; {seconds:.1f}s"
    return CriterionResult("CEX-DIVERGE", passed, detail, seconds)


def check_trace_renorm(ws: Workspace, labels: Iterable[str] = ("constant-drift", "oscillating-sign"),
                       nt: int = 257, nx: int = 257) -> CriterionResult:
    t0 = time.time()
    renorms: tuple[tuple[str, Callable], ...] = (
        ("square", lambda s: s * s), ("abs", np.abs), ("identity", lambda s: s))
    worst_rel = 0.0
    passed = True
    for label in labels:
        ctx = ws.context(label, nt, nx)
        g, f, sol = ctx["grid"], ctx["field"], ctx["solution"]
        tol = 20.0 * (g.dx + g.dt) * g.t_max * f.b_sup * (1.0 + sol.linf_bound**2)
        for name, q in renorms:
            for side in ("left", "right"):
                rep = renormalized_trace_check(sol, ctx["potential"], f, q, side)
                rel = max(rep.mismatch, rep.domination_excess) / tol
                worst_rel = max(worst_rel, rel)
                passed = passed and rel <= 1.0
    return CriterionResult("TRACE-RENORM", passed,
                           f"worst mismatch at {worst_rel:.3f} of budget", time.time() - t0)


def check_oracle_conv(ws: Workspace, nt: int = 257, nx: int = 257,
                      indices: Iterable[int] = (4, 8, 16)) -> CriterionResult:
    t0 = time.time()
    indices = tuple(indices)
    passed = True
    parts = []
    for label in ws.scenarios:
        ctx = ws.context(label, nt, nx)
        g, f, sc = ctx["grid"], ctx["field"], ctx["scenario"]
        target = f.rho * ctx["solution"].theta
        mass = float(np.sum(np.abs(target)) * g.dt * g.dx)
        dists = []
        hs = []
        for n in indices:
            mp, theta_n, rho_sm = oracle_solution(f, ctx["potential"], sc.data, n)
            dists.append(float(np.sum(np.abs(rho_sm * theta_n - target)) * g.dt * g.dx) / mass)
            hs.append(mp.h_l1)
        mono = all(dists[k + 1] <= dists[k] + 1e-12 for k in range(len(dists) - 1))
        h_mono = all(hs[k + 1] <= hs[k] + 1e-12 * (1.0 + hs[0]) for k in range(len(hs) - 1))
        ok = mono and h_mono and dists[-1] <= sc.oracle_rel_tol
        passed = passed and ok
        parts.append(f"{label} {dists[-1] * 100:.1f}%{'' if ok else '!'}")
    seconds = time.time() - t0
    passed = passed and seconds < 120.0
    return CriterionResult("ORACLE-CONV", passed,
                           f"final distances {', '.join(parts)}; {seconds:.0f}s", seconds)


def check_trace_sign(ws: Workspace, nt: int = 257, nx: int = 257) -> CriterionResult:
    """Boundary quotient signs on the non-negative-flux scenario and the
    interval-wise trace domination on every builtin.

    Both boundary columns integrate the flux in time, so each weighted
    quotient is an average of flux times solution values over one step;
    its size is bounded by the solution bound times the unweighted
    quotient plus half the flux increment across the step, exactly.
    """
    t0 = time.time()
    ctx = ws.context("positive-b", nt, nx)
    sign_worst = 0.0
    for side in ("left", "right"):
        q = boundary_time_derivative(ctx["potential"], side)
        sign_worst = max(sign_worst, float(np.max(q)))
    dom_worst = -np.inf
    for label in ws.scenarios:
        ctx = ws.context(label, nt, nx)
        f, sol = ctx["field"], ctx["solution"]
        flux = f.b * f.rho
        for side, j in (("left", 0), ("right", -1)):
            tr0 = boundary_time_derivative(ctx["potential"], side)
            tr1 = boundary_time_derivative(ctx["weighted"], side)
            du = np.abs(np.diff(flux[:, j]))
            bound = sol.linf_bound * (np.abs(tr0) + 0.5 * du)
            dom_worst = max(dom_worst, float(np.max(np.abs(tr1) - bound)))
    passed = sign_worst <= 1e-10 and dom_worst <= 1e-10
    detail = f"max quotient sign excess {sign_worst:.1e}; domination excess {dom_worst:.1e}"
    return CriterionResult("TRACE-SIGN", passed, detail, time.time() - t0)


_CHECKERS: dict[str, Callable[[Workspace], CriterionResult]] = {
    "ENV-ORACLE": check_env_oracle,
    "CHAR-PROPS": check_char_props,
    "SOL-LINF": check_sol_linf,
    "SOL-UNIQ": check_sol_uniq,
    "SOL-BC": check_sol_bc,
    "SOL-CMP": check_sol_cmp,
    "BV-SPACE": check_bv_space,
    "BV-TIME": check_bv_time,
    "CEX-DIVERGE": check_cex_diverge,
    "TRACE-RENORM": check_trace_renorm,
    "ORACLE-CONV": check_oracle_conv,
    "TRACE-SIGN": check_trace_sign,
}


def run_criteria(only: str | None = None, ws: Workspace | None = None) -> list[CriterionResult]:
    """Run all (or a glob-selected subset of) the acceptance criteria."""
    ws = ws or Workspace()
    selected = [cid for cid in CRITERIA_ORDER if only is None or fnmatch.fnmatch(cid, only)]
    return [_CHECKERS[cid](ws) for cid in selected]
