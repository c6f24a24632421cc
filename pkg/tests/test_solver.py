"""Slab solver: case formulas, transport closed forms, reports."""

import numpy as np
import pytest

from transport1d import (
    BoundaryData,
    Scenario,
    build_grid,
    build_potential,
    builtin_scenarios,
    bv_in_space_check,
    check_boundary_condition,
    comparison_check,
    renormalized_trace_check,
    sample_scenario,
    solve,
    solve_at_column,
    theta_time_trace,
    tilde_q_value,
)
from transport1d.solver import slab_edges


@pytest.fixture(scope="module")
def ramp():
    """Unit drift with ramp data: both case formulas integrate exactly."""
    data = BoundaryData(
        theta_init=lambda x: np.asarray(x, dtype=float),
        theta_left=lambda t: np.asarray(t, dtype=float),
        theta_right=lambda t: 2.0 * np.ones_like(np.asarray(t, dtype=float)),
        t_max=1.0, x_min=0.0, x_max=2.0,
    )
    sc = Scenario(
        "ramp", 1.0, 0.0, 2.0,
        rho=lambda t, x: np.ones(np.broadcast_shapes(np.shape(t), np.shape(x))),
        b=lambda t, x: np.ones(np.broadcast_shapes(np.shape(t), np.shape(x))),
        data=data,
    )
    g = build_grid(1.0, 0.0, 2.0, 201, 201)
    f = sample_scenario(sc, g)
    return sc, g, f, build_potential(f)


def test_interior_case_value(ramp):
    # curve from (0.5, 1.5) lands at y = 1.0; value = integral of y dy,
    # exact under the trapezoid rule for linear data
    sc, g, f, P = ramp
    assert tilde_q_value(P, f, sc.data, 0.5, 1.5) == pytest.approx(0.5, abs=1e-12)


def test_boundary_case_value(ramp):
    # curve from (0.75, 0.25) exits left at t = 0.5; the inflow trace is
    # -1, so the value is -integral of tau dtau over [0, 0.5] = -1/8
    sc, g, f, P = ramp
    assert tilde_q_value(P, f, sc.data, 0.75, 0.25) == pytest.approx(-0.125, abs=1e-12)


def test_base_point_validation(ramp):
    sc, g, f, P = ramp
    with pytest.raises(ValueError):
        tilde_q_value(P, f, sc.data, 0.5, 2.5)
    with pytest.raises(ValueError):
        tilde_q_value(P, f, sc.data, 1.5, 1.0)


def test_constant_drift_is_a_translation(drift, drift_solution):
    # rho == 1, b == 1: theta(t, x) = theta0(x - t) past the inflow
    # wedge and theta_left(t - x + alpha) inside it
    sc, g, f, P = drift
    tt, xx = g.times()[:, None], g.xs()[None, :]
    shift = xx - tt
    closed = np.where(
        shift >= sc.x_min,
        sc.data.theta_init(np.clip(shift, sc.x_min, sc.x_max)),
        sc.data.theta_left(np.clip(tt - (xx - sc.x_min), 0.0, sc.t_max)),
    )
    assert float(np.max(np.abs(drift_solution.theta - closed))) <= g.dx + g.dt


def test_solution_respects_data_bounds(drift_solution):
    sol = drift_solution
    assert float(np.max(np.abs(sol.theta))) <= sol.linf_bound + 1e-10
    assert sol.rho_theta == pytest.approx(sol.field.rho * sol.theta)


def test_single_slab_vs_column_solver(drift, drift_solution):
    sc, g, f, P = drift
    trace = solve_at_column(P, f, sc.data, 2.0)
    j = int(round((2.0 - g.x_min) / g.dx))
    np.testing.assert_array_equal(trace, drift_solution.theta[:, j])


def test_positive_b_spans_two_slabs():
    sc = builtin_scenarios()["positive-b"]
    g = build_grid(sc.t_max, sc.x_min, sc.x_max, 129, 129)
    f = sample_scenario(sc, g)
    edges = slab_edges(g, f.b_sup)
    assert len(edges) == 2
    assert edges[0][0] == 0 and edges[-1][1] == g.nt - 1
    assert edges[0][1] == edges[1][0]
    sol = solve(build_potential(f), f, sc.data)
    # max principle across the seam: values never leave the data range
    lo = min(sc.data.initial_at(g.xs()).min(), 0.0, 1.0)
    hi = max(sc.data.initial_at(g.xs()).max(), 2.0)
    assert float(np.min(sol.theta)) >= lo - 1e-9
    assert float(np.max(sol.theta)) <= hi + 1e-9


def test_time_trace_follows_the_data(drift, drift_solution):
    # at x = 2 the flux trace is unit, so the ratio of weighted to plain
    # quotients recovers theta0(2 - t) at interval midpoints (measured
    # max error 2.9e-6 at this resolution)
    sc, g, f, P = drift
    P_theta = build_potential(f, weight=drift_solution.theta)
    tr = theta_time_trace(drift_solution, P_theta, 2.0)
    mids = g.times()[:-1] + 0.5 * g.dt
    closed = sc.data.theta_init(2.0 - mids)
    assert float(np.max(np.abs(tr - closed))) <= 1e-4


def test_trace_abscissa_validated(drift, drift_solution):
    sc, g, f, P = drift
    P_theta = build_potential(f, weight=drift_solution.theta)
    with pytest.raises(ValueError):
        theta_time_trace(drift_solution, P_theta, g.x_min)
    with pytest.raises(ValueError):
        theta_time_trace(drift_solution, P_theta, 2.0 + 0.3 * g.dx)


def test_boundary_report_small_on_smooth_data(drift, drift_solution):
    sc, g, f, P = drift
    P_theta = build_potential(f, weight=drift_solution.theta)
    budget = 10.0 * (g.dx + g.dt) * g.t_max * f.b_sup
    for side in ("left", "right"):
        rep = check_boundary_condition(drift_solution, P, P_theta, sc.data, side)
        assert rep.mismatch <= budget
    # the right boundary of a rightward drift is never inflow
    right = check_boundary_condition(drift_solution, P, P_theta, sc.data, "right")
    assert right.active_measure == pytest.approx(0.0, abs=1e-12)


def test_renormalization_report(drift, drift_solution):
    sc, g, f, P = drift
    rep = renormalized_trace_check(drift_solution, P, f, lambda s: s * s, "left")
    budget = 20.0 * (g.dx + g.dt) * g.t_max * f.b_sup * (1.0 + drift_solution.linf_bound**2)
    assert rep.mismatch <= budget
    assert rep.domination_excess <= 1e-10


def test_comparison_of_identical_solutions(drift, drift_solution):
    rep = comparison_check(drift_solution, drift_solution, drift_solution.field)
    assert rep.passed
    assert rep.min_weighted_gap == pytest.approx(0.0, abs=1e-15)


def test_comparison_orders_shifted_data(drift):
    sc, g, f, P = drift
    plus = BoundaryData(
        theta_init=lambda x: sc.data.theta_init(x) + 1.0,
        theta_left=lambda t: sc.data.theta_left(t) + 1.0,
        theta_right=lambda t: sc.data.theta_right(t) + 1.0,
        t_max=sc.t_max, x_min=sc.x_min, x_max=sc.x_max,
    )
    sol = solve(P, f, sc.data)
    sol_plus = solve(P, f, plus)
    rep = comparison_check(sol_plus, sol, f)
    assert rep.passed
    # the gap is rho * (theta_plus - theta); with rho == 1 it is exactly 1
    assert rep.min_weighted_gap == pytest.approx(1.0, abs=1e-9)


def test_bv_space_report(drift_solution):
    rep = bv_in_space_check(drift_solution, drift_solution.data)
    assert rep.passed
    assert 0.0 < rep.max_tv <= rep.bound


def test_grid_mismatch_rejected(drift, unit_square):
    sc, g, f, P = drift
    _, _, f_other, P_other = unit_square
    with pytest.raises(ValueError):
        solve(P_other, f, sc.data)
