"""Lipschitz potentials of nearly incompressible field pairs.

For a pair (rho, b) the potential Q accumulates rho in x and -b*rho in
t, normalized to Q(0, x_min) = 0; with a bounded weight theta attached
it accumulates rho*theta and -b*rho*theta instead.  Forward difference
quotients of a potential along the lateral boundaries are the discrete
normal traces of the flux: the left quotient samples Tr[b rho theta] at
x_min from inside, the right quotient samples its negative at x_max.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import ConstructionError, FieldPair, SpaceTimeGrid, pair_residual


@dataclass(frozen=True)
class Potential:
    """Node values of a potential plus its Lipschitz bounds.

    lip_x bounds |d_x| (sup of the x-integrand), lip_t bounds |d_t|;
    monotone_x marks the unweighted case, where rho >= 0 makes every
    time level non-decreasing.  path_discrepancy records the maximum
    disagreement between the two integration orders.
    """

    grid: SpaceTimeGrid
    values: np.ndarray
    lip_x: float
    lip_t: float
    monotone_x: bool
    path_discrepancy: float


def _cumtrapz(samples: np.ndarray, step: float, axis: int) -> np.ndarray:
    """Cumulative trapezoid along an axis, zero at the first node."""
    avg = 0.5 * step * (np.take(samples, range(1, samples.shape[axis]), axis=axis)
                        + np.take(samples, range(0, samples.shape[axis] - 1), axis=axis))
    out_shape = list(samples.shape)
    zero = np.zeros([1 if a == axis else n for a, n in enumerate(out_shape)])
    return np.concatenate([zero, np.cumsum(avg, axis=axis)], axis=axis)


def build_potential(f: FieldPair, weight: np.ndarray | None = None) -> Potential:
    """Accumulate the potential lattice and enforce path consistency.

    Integration runs along the t=0 row in x first, then up each column
    in t.  The opposite order (up the x_min column, then across each
    row) must agree to within a tolerance proportional to the continuity
    residual of the actually integrated pair; a larger disagreement
    means the weighted flux is too far from a conservation law for the
    potential to be meaningful.
    """
    g = f.grid
    if weight is None:
        w = f.rho
        u = -f.b * f.rho
    else:
        weight = np.asarray(weight, dtype=float)
        if weight.shape != f.rho.shape:
            raise ValueError("weight must be sampled on the field grid")
        if not np.all(np.isfinite(weight)):
            raise ValueError("weight must be bounded")
        w = f.rho * weight
        u = -f.b * f.rho * weight

    row0 = _cumtrapz(w[:1, :], g.dx, axis=1)
    cols = _cumtrapz(u, g.dt, axis=0)
    values = row0 + cols

    col0 = _cumtrapz(u[:, :1], g.dt, axis=0)
    rows = _cumtrapz(w, g.dx, axis=1)
    alt = col0 + rows
    discrepancy = float(np.max(np.abs(values - alt)))

    residual = pair_residual(w, -u, g)
    path_tol = 20.0 * residual * g.t_max * (g.x_max - g.x_min) / min(g.dt, g.dx) + 1e-10
    if discrepancy > path_tol:
        raise ConstructionError(
            "potential not well-defined: continuity residual too large "
            f"(path discrepancy {discrepancy:.3e} > {path_tol:.3e})"
        )

    return Potential(
        grid=g,
        values=values,
        lip_x=float(np.max(np.abs(w))),
        lip_t=float(np.max(np.abs(u))),
        monotone_x=weight is None,
        path_discrepancy=discrepancy,
    )


def boundary_time_derivative(P: Potential, side: str) -> np.ndarray:
    """Forward time quotients of P along a lateral boundary.

    One value per time interval.  By the trace identity for potentials,
    side="left" returns the flux trace at x_min seen from inside and
    side="right" returns the negative of the trace at x_max.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    col = P.values[:, 0] if side == "left" else P.values[:, -1]
    return np.diff(col) / P.grid.dt


def interior_time_quotients(P: Potential, j: int) -> np.ndarray:
    """Forward time quotients along the column of abscissa index j."""
    if not (0 <= j < P.grid.nx):
        raise ValueError("abscissa index outside the grid")
    return np.diff(P.values[:, j]) / P.grid.dt
