"""Constructive solution of the initial-boundary value problem.

theta is assigned per node from the backward weak characteristic: bases
whose curve reaches the initial level strictly inside the domain carry
initial data from the curve's foot, bases whose curve collides with a
lateral boundary carry that side's inflow datum evaluated at the
collision time.  The companion potential q_tilde accumulates the same
information in integrated form: initial mass up to a reference foot
plus the boundary flux collected over the contact set of the monotone
envelope of Q along the boundary.  Agreement of q_tilde with the
potential built directly from the solved theta is the computable core
of uniqueness and is reported, never assumed.

When the time extent exceeds (x_max - x_min) / (2 b_sup) the grid is
split into time slabs inside which every base row is reachable from
the slab floor, and the construction marches slab by slab, each slab
taking the previous one's top row as its initial data.  Level curves
and envelope contact sets are invariant under the implied constant
shift of Q, so the global potential is used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import lower_increasing_envelope, upper_decreasing_envelope
from .field import BoundaryData, ConstructionError, FieldPair, SpaceTimeGrid, total_variation
from .potential import Potential, boundary_time_derivative, build_potential, interior_time_quotients
from .characteristics import backward_scan, column_scan, _locate_level


@dataclass(frozen=True)
class Solution:
    """Solved transported quantity with its bookkeeping potentials."""

    field: FieldPair
    potential: Potential
    data: BoundaryData
    theta: np.ndarray
    rho_theta: np.ndarray
    q_tilde: Potential
    linf_bound: float
    slabs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class BoundaryBookkeeping:
    """Contact-set data of one boundary for one base row."""

    side: str
    contact_mask: np.ndarray
    t_min: float
    y_bar: float


@dataclass(frozen=True)
class BoundaryReport:
    side: str
    mismatch: float
    active_measure: float


@dataclass(frozen=True)
class RenormReport:
    side: str
    mismatch: float
    domination_excess: float
    active_measure: float


@dataclass(frozen=True)
class ComparisonReport:
    min_weighted_gap: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class BVSpaceReport:
    max_tv: float
    bound: float
    worst_level: int
    passed: bool


# ---------------------------------------------------------------------------
# slab decomposition
# ---------------------------------------------------------------------------


def slab_edges(g: SpaceTimeGrid, b_sup: float) -> tuple[tuple[int, int], ...]:
    """Partition the time levels into slabs of extent <= (x_max-x_min)/(2 b_sup)."""
    if b_sup <= 0.0:
        return ((0, g.nt - 1),)
    t_slab = (g.x_max - g.x_min) / (2.0 * b_sup)
    if g.t_max <= t_slab:
        return ((0, g.nt - 1),)
    count = max(1, math.ceil(g.t_max / t_slab))
    while count < g.nt and math.ceil((g.nt - 1) / count) * g.dt > t_slab:
        count += 1
    if math.ceil((g.nt - 1) / count) * g.dt > t_slab:
        raise ConstructionError("time step too coarse to satisfy the slab condition")
    edges = [round(s * (g.nt - 1) / count) for s in range(count + 1)]
    return tuple((edges[s], edges[s + 1]) for s in range(count))


# ---------------------------------------------------------------------------
# per-row assembly helpers
# ---------------------------------------------------------------------------


def _prefix_integral(w_row: np.ndarray, g: SpaceTimeGrid) -> tuple[np.ndarray, np.ndarray]:
    """Node prefix trapezoid integral of a row from x_min, plus the row."""
    cum = np.concatenate([[0.0], np.cumsum(0.5 * g.dx * (w_row[1:] + w_row[:-1]))])
    return cum, w_row


def _prefix_at(cum: np.ndarray, w_row: np.ndarray, g: SpaceTimeGrid, x: np.ndarray) -> np.ndarray:
    """Evaluate the prefix integral at arbitrary positions inside the domain."""
    x = np.asarray(x, dtype=float)
    fx = np.clip((x - g.x_min) / g.dx, 0.0, g.nx - 1.0)
    j = np.minimum(fx.astype(int), g.nx - 2)
    xi = (fx - j) * g.dx
    w_here = w_row[j] + (w_row[j + 1] - w_row[j]) * (fx - j)
    return cum[j] + 0.5 * xi * (w_row[j] + w_here)


def _cumulative_lookup(contribs: np.ndarray, t_local: np.ndarray, dt: float) -> np.ndarray:
    """Integral of a per-interval step density from 0 to each local time."""
    cum = np.concatenate([[0.0], np.cumsum(contribs)])
    if contribs.size == 0:
        return np.zeros(t_local.shape)
    k = np.clip((t_local / dt).astype(int), 0, contribs.size - 1)
    frac = np.clip(t_local / dt - k, 0.0, 1.0)
    return cum[k] + frac * contribs[k]


def _boundary_bookkeeping(
    P: Potential, i0: int, i_bar: int, side: str, f: FieldPair
) -> BoundaryBookkeeping:
    """Contact set of the boundary envelope over slab levels [i0, i_bar]."""
    g = P.grid
    col = P.values[i0 : i_bar + 1, 0 if side == "left" else -1]
    env = upper_decreasing_envelope(col) if side == "left" else lower_increasing_envelope(col)
    k_min = int(np.argmax(env.contact))
    if k_min == 0:
        y_bar = g.x_min if side == "left" else g.x_max
    else:
        eps = g.dx
        x_base = g.x_min + eps if side == "left" else g.x_max - eps
        probe = backward_scan(P, f.b_sup, i0 + k_min, np.array([x_base]), floor_level=i0)
        y_bar = float(probe["pos_floor"][0])
    return BoundaryBookkeeping(side, env.contact, (i0 + k_min) * g.dt, y_bar)


def _case2_contributions(
    P: Potential,
    bookkeeping: BoundaryBookkeeping,
    data: BoundaryData,
    i0: int,
    i_bar: int,
) -> np.ndarray:
    """Per-interval boundary flux integrand over the slab, zero off contact.

    Both sides reduce to the raw forward quotient of Q at the boundary
    column times the inflow datum: the left quotient equals the flux
    trace, the right quotient its negative, matching the sign carried
    by the respective case formula.
    """
    g = P.grid
    contact = bookkeeping.contact_mask
    both = contact[:-1] & contact[1:]
    j = 0 if bookkeeping.side == "left" else -1
    quot = np.diff(P.values[i0 : i_bar + 1, j]) / g.dt
    t_mid = (np.arange(i0, i_bar) + 0.5) * g.dt
    datum = data.left_at(t_mid) if bookkeeping.side == "left" else data.right_at(t_mid)
    return np.where(both, quot * datum * g.dt, 0.0)


def _fill_seams(values: np.ndarray, case: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Replace values on nodes hugging a case change by linear interpolation."""
    marked = np.zeros(case.size, dtype=bool)
    change = np.nonzero(case[:-1] != case[1:])[0]
    for p in change:
        marked[p] = True
        marked[p + 1] = True
    if not np.any(marked) or np.all(marked):
        return values
    out = values.copy()
    out[marked] = np.interp(xs[marked], xs[~marked], values[~marked])
    return out


# ---------------------------------------------------------------------------
# the three-case value and the full solve
# ---------------------------------------------------------------------------


def _row_values(
    P: Potential,
    f: FieldPair,
    data: BoundaryData,
    i0: int,
    i_bar: int,
    theta_floor: np.ndarray,
    initial_eval,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """theta, q_tilde and case id for one base row within a slab.

    theta_floor is the solved row at the slab floor; initial_eval(x)
    evaluates the slab's initial profile between nodes.
    """
    g = P.grid
    xs = g.xs()
    bases = xs.copy()
    bases[0] = g.x_min + 0.5 * g.dx
    bases[-1] = g.x_max - 0.5 * g.dx
    scan = backward_scan(P, f.b_sup, i_bar, bases, floor_level=i0)
    side = scan["side"]
    t_star = scan["t_star"]
    case = np.where(side == 0, 1, np.where(side < 0, 2, 3)).astype(np.int8)

    cum, w_row = _prefix_integral(f.rho[i0] * theta_floor, g)

    theta = np.empty(g.nx)
    q_tilde = np.empty(g.nx)

    interior = case == 1
    if np.any(interior):
        feet = scan["pos_floor"][interior]
        theta[interior] = initial_eval(feet)
        q_tilde[interior] = _prefix_at(cum, w_row, g, feet)

    for side_name, case_id in (("left", 2), ("right", 3)):
        mask = case == case_id
        if not np.any(mask):
            continue
        bb = _boundary_bookkeeping(P, i0, i_bar, side_name, f)
        contribs = _case2_contributions(P, bb, data, i0, i_bar)
        t_local = t_star[mask] - i0 * g.dt
        flux = _cumulative_lookup(contribs, t_local, g.dt)
        q_tilde[mask] = _prefix_at(cum, w_row, g, np.array(bb.y_bar)) + flux
        datum = data.left_at(t_star[mask]) if side_name == "left" else data.right_at(t_star[mask])
        theta[mask] = datum

    q_tilde = _fill_seams(q_tilde, case, xs)
    return theta, q_tilde, case


def tilde_q_value(
    P: Potential, f: FieldPair, data: BoundaryData, t_bar: float, x_bar: float
) -> float:
    """The case formula at a single interior point (single slab).

    The caller keeps x_bar one cell away from the division points; at
    the division points themselves the lattice assembly in solve fills
    values by continuity instead.
    """
    g = P.grid
    i_bar = _locate_level(g, t_bar)
    if not (0 < i_bar <= g.nt - 1) or not (g.x_min < x_bar < g.x_max):
        raise ValueError("base point outside the grid interior")
    scan = backward_scan(P, f.b_sup, i_bar, np.array([float(x_bar)]))
    side = int(scan["side"][0])
    theta0 = data.initial_at(g.xs())
    cum, w_row = _prefix_integral(f.rho[0] * theta0, g)
    if side == 0:
        return float(_prefix_at(cum, w_row, g, scan["pos_floor"][:1])[0])
    side_name = "left" if side < 0 else "right"
    bb = _boundary_bookkeeping(P, 0, i_bar, side_name, f)
    contribs = _case2_contributions(P, bb, data, 0, i_bar)
    flux = _cumulative_lookup(contribs, scan["t_star"][:1], g.dt)
    return float(_prefix_at(cum, w_row, g, np.array(bb.y_bar)) + flux[0])


def solve(
    P: Potential, f: FieldPair, data: BoundaryData, g: SpaceTimeGrid | None = None
) -> Solution:
    """Solve the initial-boundary value problem on the field's grid."""
    grid = f.grid
    if g is not None and g != grid:
        raise ValueError("grid does not match the field pair")
    if P.values.shape != (grid.nt, grid.nx):
        raise ValueError("potential does not match the field pair")

    xs = grid.xs()
    theta = np.empty((grid.nt, grid.nx))
    q_tilde = np.empty((grid.nt, grid.nx))
    theta[0] = data.initial_at(xs)
    cum0, w0 = _prefix_integral(f.rho[0] * theta[0], grid)
    q_tilde[0] = cum0

    slabs = slab_edges(grid, f.b_sup)
    for i0, i1 in slabs:
        theta_floor = theta[i0]
        if i0 == 0:
            initial_eval = lambda x: data.initial_at(x)  # noqa: E731
        else:
            floor_row = theta[i0]
            initial_eval = lambda x, row=floor_row: np.interp(x, xs, row)  # noqa: E731
        offset = q_tilde[i0, 0]
        for i_bar in range(i0 + 1, i1 + 1):
            row_theta, row_q, _ = _row_values(P, f, data, i0, i_bar, theta_floor, initial_eval)
            theta[i_bar] = row_theta
            q_tilde[i_bar] = row_q + offset

    linf = data.sup_norm()
    qt = Potential(
        grid=grid,
        values=q_tilde,
        lip_x=float(np.max(np.abs(f.rho)) * linf),
        lip_t=float(np.max(np.abs(f.b * f.rho)) * linf),
        monotone_x=False,
        path_discrepancy=0.0,
    )
    return Solution(
        field=f,
        potential=P,
        data=data,
        theta=theta,
        rho_theta=f.rho * theta,
        q_tilde=qt,
        linf_bound=linf,
        slabs=slabs,
    )


def solve_at_column(P: Potential, f: FieldPair, data: BoundaryData, x_bar: float) -> np.ndarray:
    """theta(t_i, x_bar) for every level, without assembling the full grid.

    Streaming variant for fine-resolution single-column studies; valid
    on single-slab problems.
    """
    g = f.grid
    if len(slab_edges(g, f.b_sup)) != 1:
        raise ValueError("column solve requires the single-slab condition")
    if not (g.x_min < x_bar < g.x_max):
        raise ValueError("column must be strictly interior")
    scan = column_scan(P, f.b_sup, float(x_bar))
    out = np.empty(g.nt)
    side = scan["side"]
    interior = side == 0
    out[interior] = data.initial_at(scan["pos_floor"][interior])
    left = side < 0
    out[left] = data.left_at(scan["t_star"][left])
    right = side > 0
    out[right] = data.right_at(scan["t_star"][right])
    out[0] = float(data.initial_at(np.array(float(x_bar))))
    return out


# ---------------------------------------------------------------------------
# traces and verification reports
# ---------------------------------------------------------------------------


def theta_time_trace(sol: Solution, P_theta: Potential, x: float) -> np.ndarray:
    """Flux-weighted time trace of theta along a column.

    Ratio of the forward time quotients of Q_theta and Q; on intervals
    where the Q quotient sits below the trace floor the previous value
    is held (the trace identity pins the ratio only against a
    non-vanishing flux trace).
    """
    g = sol.field.grid
    j = int(round((x - g.x_min) / g.dx))
    if not (0 < j <= g.nx - 1) or abs(x - (g.x_min + j * g.dx)) > 1e-9 * (g.x_max - g.x_min):
        raise ValueError("trace abscissa must be an interior node or the right endpoint")
    num = interior_time_quotients(P_theta, j)
    den = interior_time_quotients(sol.potential, j)
    floor = 1e-8 * sol.potential.lip_t
    valid = np.abs(den) > floor
    ratio = np.zeros(num.shape)
    np.divide(num, den, out=ratio, where=valid)
    if not np.any(valid):
        return ratio
    idx = np.where(valid, np.arange(valid.size), -1)
    last = np.maximum.accumulate(idx)
    first = int(np.argmax(valid))
    last[last < 0] = first
    return ratio[last]


def _side_traces(P: Potential, P_theta: Potential, side: str) -> tuple[np.ndarray, np.ndarray]:
    """True flux traces (Tr[b rho], Tr[b rho theta]) on one boundary."""
    sign = 1.0 if side == "left" else -1.0
    return (
        sign * boundary_time_derivative(P, side),
        sign * boundary_time_derivative(P_theta, side),
    )


def check_boundary_condition(
    sol: Solution, P: Potential, P_theta: Potential, data: BoundaryData, side: str
) -> BoundaryReport:
    """L1 mismatch of the inflow condition over the active set of one side."""
    g = sol.field.grid
    tr0, tr1 = _side_traces(P, P_theta, side)
    floor = 1e-8 * P.lip_t
    active = tr0 < -floor
    t_mid = (np.arange(g.nt - 1) + 0.5) * g.dt
    datum = data.left_at(t_mid) if side == "left" else data.right_at(t_mid)
    mismatch = float(np.sum(np.abs(tr1 - tr0 * datum)[active]) * g.dt)
    return BoundaryReport(side, mismatch, float(np.sum(active) * g.dt))


def renormalized_trace_check(
    sol: Solution, P: Potential, f: FieldPair, q, side: str
) -> RenormReport:
    """Compare the trace of b rho q(theta) against the renormalized form.

    Active intervals check Tr[b rho q(theta)] = Tr[b rho] q(ratio) in L1;
    below the floor only the domination |trace| <= sup|q(theta)| |Tr[b rho]|
    (plus a floor-scale tolerance) is enforceable.
    """
    g = f.grid
    q_theta = np.asarray(q(sol.theta), dtype=float)
    P_q = build_potential(f, weight=q_theta)
    P_theta = build_potential(f, weight=sol.theta)
    tr0, tr1 = _side_traces(P, P_theta, side)
    trq, _ = _side_traces(P_q, P_q, side)
    floor = 1e-8 * P.lip_t
    m_q = float(np.max(np.abs(q_theta)))
    active = np.abs(tr0) > floor
    ratio = np.zeros(tr0.shape)
    np.divide(tr1, tr0, out=ratio, where=active)
    model = tr0 * np.asarray(q(ratio), dtype=float)
    mismatch = float(np.sum(np.abs(trq - model)[active]) * g.dt)
    dom_tol = 1e-8 * (1.0 + m_q * P.lip_t)
    excess = np.abs(trq) - m_q * np.abs(tr0) - dom_tol
    excess = float(max(0.0, np.max(excess[~active], initial=0.0)))
    return RenormReport(side, mismatch, excess, float(np.sum(active) * g.dt))


def comparison_check(sol_a: Solution, sol_b: Solution, f: FieldPair) -> ComparisonReport:
    """Weighted monotonicity of solutions under ordered data."""
    if sol_a.field.grid != f.grid or sol_b.field.grid != f.grid:
        raise ValueError("solutions must share the field's grid")
    gap = float(np.min(f.rho * (sol_a.theta - sol_b.theta)))
    threshold = -1e-8 * max(sol_a.linf_bound, sol_b.linf_bound)
    return ComparisonReport(gap, threshold, gap >= threshold)


def bv_in_space_check(sol: Solution, data: BoundaryData) -> BVSpaceReport:
    """Per-level spatial variation against the five-term data bound."""
    bound = (
        data.tv_left()
        + abs(data.left_initial_limit() - data.init_left_limit())
        + data.tv_init()
        + abs(data.init_right_limit() - data.right_initial_limit())
        + data.tv_right()
    )
    tol = 1e-6 * (1.0 + bound)
    max_tv = 0.0
    worst = 0
    for i in range(sol.theta.shape[0]):
        row = sol.theta[i][sol.field.rho[i] > 0.0]
        if row.size < 2:
            continue
        tv = total_variation(row)
        if tv > max_tv:
            max_tv = tv
            worst = i
    return BVSpaceReport(max_tv, bound, worst, max_tv <= bound + tol)
