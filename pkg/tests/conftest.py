"""Shared fixtures: sampled builtin scenarios at a moderate resolution.

Session scope amortizes field sampling and potential assembly across
the unit-test modules; the acceptance module manages its own workspace
with the resolutions each criterion pins.
"""

import numpy as np
import pytest

from transport1d import (
    BoundaryData,
    Scenario,
    build_grid,
    build_potential,
    builtin_scenarios,
    sample_scenario,
    solve,
)


@pytest.fixture(scope="session")
def scenarios():
    return builtin_scenarios()


@pytest.fixture(scope="session")
def drift(scenarios):
    sc = scenarios["constant-drift"]
    g = build_grid(sc.t_max, sc.x_min, sc.x_max, 129, 129)
    f = sample_scenario(sc, g)
    P = build_potential(f)
    return sc, g, f, P


@pytest.fixture(scope="session")
def drift_solution(drift):
    sc, g, f, P = drift
    return solve(P, f, sc.data)


@pytest.fixture(scope="session")
def unit_square():
    """rho == 1, b == 1 on [0,1] x [0,1]: every construction is exact."""
    data = BoundaryData(
        theta_init=lambda x: np.asarray(x, dtype=float),
        theta_left=lambda t: np.asarray(t, dtype=float),
        theta_right=lambda t: 2.0 * np.ones_like(np.asarray(t, dtype=float)),
        t_max=1.0, x_min=0.0, x_max=1.0,
    )
    sc = Scenario(
        "unit-square", 1.0, 0.0, 1.0,
        rho=lambda t, x: np.ones(np.broadcast_shapes(np.shape(t), np.shape(x))),
        b=lambda t, x: np.ones(np.broadcast_shapes(np.shape(t), np.shape(x))),
        data=data,
    )
    g = build_grid(1.0, 0.0, 1.0, 101, 101)
    f = sample_scenario(sc, g)
    return sc, g, f, build_potential(f)
