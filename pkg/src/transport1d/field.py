"""Grids, density/velocity fields, boundary data, and builtin scenarios.

Everything downstream works on a uniform node-centered lattice over
[0, T] x [alpha, beta].  A scenario bundles a bounded velocity b and a
bounded non-negative density rho that (distributionally) satisfy
d_t rho + d_x (b rho) = 0, together with initial/boundary profiles for
the transported quantity theta.  Sampling a scenario onto a grid
measures the discrete continuity residual and refuses fields that are
not nearly incompressible at that resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

Profile = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


class ConstructionError(RuntimeError):
    """A numerical construction failed (bad field, residual, or potential)."""


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Uniform lattice with nt time levels on [0, t_max] and nx abscissas."""

    t_max: float
    x_min: float
    x_max: float
    nt: int
    nx: int

    @property
    def dt(self) -> float:
        return self.t_max / (self.nt - 1)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.nt)

    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)


def build_grid(t_max: float, x_min: float, x_max: float, nt: int, nx: int) -> SpaceTimeGrid:
    """Validate extents and node counts and return the lattice."""
    if not (t_max > 0.0) or not math.isfinite(t_max):
        raise ValueError("non-positive time extent")
    if not (x_max > x_min) or not (math.isfinite(x_min) and math.isfinite(x_max)):
        raise ValueError("non-positive space extent")
    if nt < 2 or nx < 2:
        raise ValueError("grid needs at least two nodes per axis")
    return SpaceTimeGrid(float(t_max), float(x_min), float(x_max), int(nt), int(nx))


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------


def total_variation(values: np.ndarray) -> float:
    """Total variation of a sampled profile, sum of |increments|."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("total_variation expects a non-empty 1D sample")
    if v.size == 1:
        return 0.0
    return float(np.sum(np.abs(np.diff(v))))


def pair_residual(density: np.ndarray, flux: np.ndarray, grid: SpaceTimeGrid) -> float:
    """Scaled sup of the centered-difference conservation defect.

    Returns max over interior nodes of
    |D_t density + D_x flux| * min(dt, dx), zero when there is no interior.
    """
    if grid.nt < 3 or grid.nx < 3:
        return 0.0
    dt_term = (density[2:, 1:-1] - density[:-2, 1:-1]) / (2.0 * grid.dt)
    dx_term = (flux[1:-1, 2:] - flux[1:-1, :-2]) / (2.0 * grid.dx)
    return float(np.max(np.abs(dt_term + dx_term)) * min(grid.dt, grid.dx))


def continuity_residual(rho: np.ndarray, b: np.ndarray, grid: SpaceTimeGrid) -> float:
    """Continuity defect of a density/velocity pair (flux = b * rho)."""
    return pair_residual(rho, b * rho, grid)


def _as_profile_array(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("tabulated profile needs at least two samples")
    return v


def _eval_initial(profile: Profile, x: np.ndarray, x_min: float, x_max: float) -> np.ndarray:
    """Initial profiles interpolate linearly between tabulated samples."""
    x = np.asarray(x, dtype=float)
    if callable(profile):
        return np.asarray(profile(x), dtype=float)
    v = _as_profile_array(profile)
    return np.interp(x, np.linspace(x_min, x_max, v.size), v)


def _eval_temporal(profile: Profile, t: np.ndarray, t_max: float) -> np.ndarray:
    """Temporal profiles snap to the nearest tabulated sample.

    Nearest-sample evaluation keeps jumps of BV boundary data localized
    to one time step instead of smearing them across a cell.
    """
    t = np.asarray(t, dtype=float)
    if callable(profile):
        return np.asarray(profile(t), dtype=float)
    v = _as_profile_array(profile)
    idx = np.clip(np.rint(t / t_max * (v.size - 1)).astype(int), 0, v.size - 1)
    return v[idx]


def _profile_sup(profile: Profile, lo: float, hi: float, n: int = 4097) -> float:
    if callable(profile):
        return float(np.max(np.abs(np.asarray(profile(np.linspace(lo, hi, n)), dtype=float))))
    return float(np.max(np.abs(_as_profile_array(profile))))


def _profile_tv(profile: Profile, lo: float, hi: float, n: int = 4097) -> float:
    if callable(profile):
        return total_variation(np.asarray(profile(np.linspace(lo, hi, n)), dtype=float))
    return total_variation(_as_profile_array(profile))


# ---------------------------------------------------------------------------
# boundary data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryData:
    """Initial profile on [x_min, x_max] plus inflow profiles on [0, t_max].

    Each profile is either a vectorized callable or a 1D array sampled
    uniformly over its domain.  `theta_left` feeds the inflow part of the
    left boundary, `theta_right` the right one; whether they are used at
    a given time is decided by the sign of the boundary flux trace.
    """

    theta_init: Profile
    theta_left: Profile
    theta_right: Profile
    t_max: float
    x_min: float
    x_max: float

    def initial_at(self, x: np.ndarray) -> np.ndarray:
        return _eval_initial(self.theta_init, x, self.x_min, self.x_max)

    def left_at(self, t: np.ndarray) -> np.ndarray:
        return _eval_temporal(self.theta_left, t, self.t_max)

    def right_at(self, t: np.ndarray) -> np.ndarray:
        return _eval_temporal(self.theta_right, t, self.t_max)

    # one-sided limit values used by corner-compatibility terms
    def init_left_limit(self) -> float:
        return float(self.initial_at(np.array(self.x_min)))

    def init_right_limit(self) -> float:
        return float(self.initial_at(np.array(self.x_max)))

    def left_initial_limit(self) -> float:
        return float(self.left_at(np.array(0.0)))

    def right_initial_limit(self) -> float:
        return float(self.right_at(np.array(0.0)))

    def left_final_limit(self) -> float:
        return float(self.left_at(np.array(self.t_max)))

    def right_final_limit(self) -> float:
        return float(self.right_at(np.array(self.t_max)))

    def sup_norm(self) -> float:
        """Max of the three profile sup norms (measured on a dense lattice)."""
        return max(
            _profile_sup(self.theta_init, self.x_min, self.x_max),
            _profile_sup(self.theta_left, 0.0, self.t_max),
            _profile_sup(self.theta_right, 0.0, self.t_max),
        )

    def tv_init(self) -> float:
        return _profile_tv(self.theta_init, self.x_min, self.x_max)

    def tv_left(self) -> float:
        return _profile_tv(self.theta_left, 0.0, self.t_max)

    def tv_right(self) -> float:
        return _profile_tv(self.theta_right, 0.0, self.t_max)


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """Closed-form (or interpolated) field pair with boundary data."""

    label: str
    t_max: float
    x_min: float
    x_max: float
    rho: Callable[[np.ndarray, np.ndarray], np.ndarray]
    b: Callable[[np.ndarray, np.ndarray], np.ndarray]
    data: BoundaryData
    oracle_rel_tol: float = 0.05


@dataclass(frozen=True)
class FieldPair:
    """Field samples on a grid, with the measured continuity residual."""

    grid: SpaceTimeGrid
    rho: np.ndarray
    b: np.ndarray
    b_sup: float
    residual: float


def sample_scenario(scenario: Scenario, grid: SpaceTimeGrid, tol: float | None = None) -> FieldPair:
    """Sample rho and b on the lattice and enforce near incompressibility.

    The default tolerance 10 * (dx^2 + dt^2) * (1 + b_sup) accepts any
    field pair whose continuity defect is at second-order quadrature
    accuracy on this grid.
    """
    tt = grid.times()[:, None]
    xx = grid.xs()[None, :]
    rho = np.broadcast_to(np.asarray(scenario.rho(tt, xx), dtype=float), (grid.nt, grid.nx)).copy()
    b = np.broadcast_to(np.asarray(scenario.b(tt, xx), dtype=float), (grid.nt, grid.nx)).copy()
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(b))):
        raise ConstructionError("field samples are not finite")
    if np.min(rho) < 0.0:
        raise ConstructionError("negative density")
    b_sup = float(np.max(np.abs(b)))
    residual = continuity_residual(rho, b, grid)
    if tol is None:
        tol = 10.0 * (grid.dx**2 + grid.dt**2) * (1.0 + b_sup)
    if residual > tol:
        raise ConstructionError("not nearly incompressible at this resolution")
    return FieldPair(grid, rho, b, b_sup, residual)


def tabulated_scenario(
    grid: SpaceTimeGrid,
    rho: np.ndarray,
    b: np.ndarray,
    data: BoundaryData,
    label: str = "tabulated",
) -> Scenario:
    """Wrap field samples into a scenario via bilinear interpolation."""
    rho = np.asarray(rho, dtype=float)
    b = np.asarray(b, dtype=float)
    if rho.shape != (grid.nt, grid.nx) or b.shape != (grid.nt, grid.nx):
        raise ValueError("tabulated fields must match the grid shape")

    def _bilinear(values: np.ndarray) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        def interp(t: np.ndarray, x: np.ndarray) -> np.ndarray:
            t = np.clip(np.asarray(t, dtype=float), 0.0, grid.t_max)
            x = np.clip(np.asarray(x, dtype=float), grid.x_min, grid.x_max)
            ft = np.clip(t / grid.dt, 0.0, grid.nt - 1.0)
            fx = np.clip((x - grid.x_min) / grid.dx, 0.0, grid.nx - 1.0)
            i0 = np.minimum(ft.astype(int), grid.nt - 2)
            j0 = np.minimum(fx.astype(int), grid.nx - 2)
            wt = ft - i0
            wx = fx - j0
            v00 = values[i0, j0]
            v01 = values[i0, j0 + 1]
            v10 = values[i0 + 1, j0]
            v11 = values[i0 + 1, j0 + 1]
            return (1 - wt) * ((1 - wx) * v00 + wx * v01) + wt * ((1 - wx) * v10 + wx * v11)

        return interp

    return Scenario(label, grid.t_max, grid.x_min, grid.x_max, _bilinear(rho), _bilinear(b), data)


# ---------------------------------------------------------------------------
# builtin scenarios
# ---------------------------------------------------------------------------


def _oscillation_speed(t: np.ndarray) -> np.ndarray:
    """Derivative of a(t) = (1-t)^2 sin(pi / (1-t)), finite for t < 1."""
    s = 1.0 - np.asarray(t, dtype=float)
    s = np.where(s > 0.0, s, np.finfo(float).tiny)
    phase = np.pi / s
    return -2.0 * s * np.sin(phase) + np.pi * np.cos(phase)


def oscillation_displacement(t: np.ndarray) -> np.ndarray:
    """Interface position a(t) = (1-t)^2 sin(pi / (1-t)) with a(1) = 0."""
    s = 1.0 - np.asarray(t, dtype=float)
    safe = np.where(s != 0.0, s, 1.0)
    return np.where(s != 0.0, safe**2 * np.sin(np.pi / safe), 0.0)


def _constant_drift() -> Scenario:
    data = BoundaryData(
        theta_init=lambda x: 1.0 + 0.5 * np.tanh(x - 2.0),
        theta_left=lambda t: 0.5 + 0.4 * np.sin(np.pi * t),
        theta_right=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        t_max=1.0,
        x_min=0.0,
        x_max=4.0,
    )
    return Scenario(
        "constant-drift",
        1.0,
        0.0,
        4.0,
        rho=lambda t, x: np.ones(np.broadcast_shapes(np.shape(t), np.shape(x))),
        b=lambda t, x: np.ones(np.broadcast_shapes(np.shape(t), np.shape(x))),
        data=data,
    )


def _vacuum_patch() -> Scenario:
    # density 1 near both boundaries, a true vacuum band around the moving
    # center, C2 quintic ramps so sampled difference quotients see no
    # curvature jumps; inside the band the speed is bumped away from the
    # drift, which the flux never sees because rho vanishes there exactly
    speed = 0.75

    def rho0(x: np.ndarray) -> np.ndarray:
        y = np.clip((np.abs(np.asarray(x, dtype=float) - 2.4) - 0.3) / 1.2, 0.0, 1.0)
        return y**3 * (10.0 - 15.0 * y + 6.0 * y**2)

    def b_fn(t: np.ndarray, x: np.ndarray) -> np.ndarray:
        u = (np.asarray(x, dtype=float) - 2.4 - speed * np.asarray(t, dtype=float)) / 0.25
        u = np.broadcast_to(u, np.broadcast_shapes(np.shape(t), np.shape(x)))
        inside = np.abs(u) < 1.0
        uc = np.where(inside, u, 0.0)
        bump = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - uc**2)), 0.0)
        return speed + 0.25 * bump

    data = BoundaryData(
        theta_init=lambda x: 1.0 + 0.5 * np.sin(np.pi * np.asarray(x, dtype=float) / 4.0),
        theta_left=lambda t: 1.0 + 0.25 * np.asarray(t, dtype=float),
        theta_right=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        t_max=1.0,
        x_min=0.0,
        x_max=8.0,
    )
    return Scenario(
        "vacuum-patch",
        1.0,
        0.0,
        8.0,
        rho=lambda t, x: rho0(np.asarray(x, dtype=float) - speed * np.asarray(t, dtype=float)),
        b=b_fn,
        data=data,
    )


def _oscillating_sign() -> Scenario:
    # T stops one dyadic step short of the accumulation time of the speed's
    # sign flips, so every node sees a smooth b while the inflow trace still
    # oscillates often enough to break any BV-in-time bound.
    t_max = 31.0 / 32.0
    data = BoundaryData(
        theta_init=lambda x: np.sign(np.asarray(x, dtype=float)),
        theta_left=lambda t: np.full_like(np.asarray(t, dtype=float), -1.0),
        theta_right=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        t_max=t_max,
        x_min=-4.0,
        x_max=4.0,
    )
    return Scenario(
        "oscillating-sign",
        t_max,
        -4.0,
        4.0,
        rho=lambda t, x: np.ones(np.broadcast_shapes(np.shape(t), np.shape(x))),
        b=lambda t, x: np.broadcast_to(
            _oscillation_speed(t), np.broadcast_shapes(np.shape(t), np.shape(x))
        ).copy(),
        data=data,
        oracle_rel_tol=0.10,
    )


def _positive_b() -> Scenario:
    # steady pair with b*rho identically one: the sampled continuity
    # residual vanishes exactly, and b stays in [2/3, 2]
    def rho_fn(t: np.ndarray, x: np.ndarray) -> np.ndarray:
        shape = np.broadcast_shapes(np.shape(t), np.shape(x))
        return np.broadcast_to(1.0 + 0.5 * np.cos(np.pi * np.asarray(x, dtype=float) / 2.0), shape).copy()

    data = BoundaryData(
        theta_init=lambda x: np.where(np.asarray(x, dtype=float) < 0.55, 0.5, 1.5),
        theta_left=lambda t: np.where(np.asarray(t, dtype=float) < 0.1, 1.0, 0.75),
        theta_right=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        t_max=1.6,
        x_min=0.0,
        x_max=4.0,
    )
    return Scenario(
        "positive-b",
        1.6,
        0.0,
        4.0,
        rho=rho_fn,
        b=lambda t, x: 1.0 / rho_fn(t, x),
        data=data,
    )


def builtin_scenarios() -> dict[str, Scenario]:
    """Labelled builtin scenarios used by the CLI and the test suite."""
    scenarios = [_constant_drift(), _vacuum_patch(), _oscillating_sign(), _positive_b()]
    return {s.label: s for s in scenarios}


def get_scenario(label: str) -> Scenario:
    table = builtin_scenarios()
    if label not in table:
        raise ValueError(f"unknown scenario {label!r}; builtins: {', '.join(sorted(table))}")
    return table[label]
