"""Weak characteristic curves on exact and sampled potentials."""

import numpy as np
import pytest

from transport1d import (
    backward_scan,
    build_grid,
    build_potential,
    builtin_scenarios,
    division_points,
    level_curve,
    sample_scenario,
)
from transport1d.characteristics import column_scan


def test_unit_square_forward_collision(unit_square):
    # Q = x - t: the curve through (0.9, 0.95) is the line x = 0.05 + t,
    # hitting the right boundary at t = 0.95
    _, g, f, P = unit_square
    c = level_curve(P, f, 0.9, 0.95)
    assert c.h_bar == pytest.approx(0.05, abs=1e-12)
    assert c.t_star == pytest.approx(0.0, abs=1e-12)
    assert c.t_upper == pytest.approx(0.95, abs=1e-9)
    assert c.collided_at == "right"
    t = g.times()
    np.testing.assert_allclose(c.positions, np.minimum(0.05 + t, 1.0), atol=1e-9)


def test_unit_square_backward_collision(unit_square):
    _, g, f, P = unit_square
    c = level_curve(P, f, 0.9, 0.3)
    assert c.t_star == pytest.approx(0.6, abs=1e-9)
    assert c.collided_at == "left"
    assert c.t_upper == pytest.approx(1.0, abs=1e-12)
    # the forward half continues along the same line to x = 0.4 at T
    assert c.positions[-1] == pytest.approx(0.4, abs=1e-9)


def test_unit_square_division_points(unit_square):
    # backward lines x - (0.9 - t) exit left exactly for bases below 0.9;
    # a landing exactly on the corner is an entry, so 0.9 survives
    _, g, f, P = unit_square
    x_alpha, x_beta = division_points(P, f, 0.9)
    assert x_alpha == pytest.approx(0.9, abs=g.dx + 1e-12)
    assert x_beta == pytest.approx(1.0, abs=1e-12)


def test_level_curve_requires_interior_base(unit_square):
    _, g, f, P = unit_square
    with pytest.raises(ValueError):
        level_curve(P, f, 0.0, 0.5)
    with pytest.raises(ValueError):
        level_curve(P, f, 0.5, 0.0)
    with pytest.raises(ValueError):
        level_curve(P, f, 0.505, 0.5)  # off the time lattice


def test_backward_scan_matches_level_curve(unit_square):
    _, g, f, P = unit_square
    i_bar = 80
    xs = np.array([0.15, 0.5, 0.925])
    scan = backward_scan(P, f.b_sup, i_bar, xs)
    for k, x_bar in enumerate(xs):
        c = level_curve(P, f, i_bar * g.dt, float(x_bar))
        assert scan["t_star"][k] == pytest.approx(c.t_star, abs=1e-12)
        assert scan["h_bar"][k] == pytest.approx(c.h_bar, abs=1e-12)
        assert scan["pos_floor"][k] == pytest.approx(c.positions[0], abs=1e-12)


def test_column_scan_matches_backward_scan(drift):
    _, g, f, P = drift
    x_bar = 2.0
    col = column_scan(P, f.b_sup, x_bar)
    for i_bar in (5, 40, 90, g.nt - 1):
        scan = backward_scan(P, f.b_sup, i_bar, np.array([x_bar]))
        assert col["t_star"][i_bar] == pytest.approx(float(scan["t_star"][0]), abs=1e-10)
        assert int(col["side"][i_bar]) == int(scan["side"][0])
        assert col["pos_floor"][i_bar] == pytest.approx(
            float(scan["pos_floor"][0]), abs=1e-10)


def test_level_identity_on_sampled_field():
    # wherever the curve is strictly inside, the potential along it stays
    # within the discrete level tolerance of the base value
    sc = builtin_scenarios()["vacuum-patch"]
    g = build_grid(sc.t_max, sc.x_min, sc.x_max, 129, 129)
    f = sample_scenario(sc, g)
    P = build_potential(f)
    tol_f = P.lip_x * 2.0 * g.dx + P.lip_t * g.dt
    rng = np.random.default_rng(3)
    xs, ts = g.xs(), g.times()
    for _ in range(20):
        i_bar = int(rng.integers(1, g.nt - 1))
        x_bar = float(rng.uniform(g.x_min + 2 * g.dx, g.x_max - 2 * g.dx))
        c = level_curve(P, f, ts[i_bar], x_bar)
        inside = (c.positions > g.x_min + 1e-12) & (c.positions < g.x_max - 1e-12)
        q_on_curve = np.array([
            np.interp(c.positions[i], xs, P.values[i])
            for i in np.flatnonzero(inside)
        ])
        assert np.max(np.abs(q_on_curve - c.h_bar)) <= tol_f


def test_base_monotonicity_in_abscissa(unit_square):
    # two curves from the same level never cross: positions ordered like bases
    _, g, f, P = unit_square
    low = level_curve(P, f, 0.5, 0.4)
    high = level_curve(P, f, 0.5, 0.6)
    assert np.all(high.positions - low.positions >= -1e-12)
