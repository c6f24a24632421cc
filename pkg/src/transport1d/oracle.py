"""Independent reference solver by mollification and smooth characteristics.

The field pair is extended past the boundaries by constants and traces,
mollified with one-sided anisotropic kernels (future in time, one side
in space) so that the regularized flux converges to the boundary trace
from the correct side, and the resulting smooth transport problem is
solved by backward RK4 characteristics.  Nothing here shares code with
the potential/envelope construction, which is the point: agreement of
the two solvers is evidence, not tautology.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .field import BoundaryData, FieldPair, SpaceTimeGrid
from .potential import Potential

Field2D = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ExtendedFields:
    """Whole-plane extension (A, B) of (rho, b rho)."""

    grid: SpaceTimeGrid
    A: Field2D
    B: Field2D
    m_bound: float


@dataclass(frozen=True)
class MollifiedProblem:
    """Smooth regularized fields and data at mollification index n.

    rho_n carries the 1/n lower shim that keeps b_n = B_n / rho_n
    bounded; rho_smooth is the same field without the shim and is the
    quantity that converges to rho.
    """

    n: int
    rho_n: Field2D
    rho_smooth: Field2D
    b_n: Field2D
    bn_sup: float
    data_n: BoundaryData
    h_sup: float
    h_l1: float


def _bump(u: np.ndarray) -> np.ndarray:
    """Polynomial bump on [0,1] with unit integral, zero at both ends."""
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    return np.where(inside, 30.0 * u**2 * (1.0 - u) ** 2, 0.0)


def _tap_weights(k_taps: int) -> np.ndarray:
    w = _bump(np.arange(k_taps + 1) / k_taps)
    return w / np.sum(w)


def _smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity transition from 1 at u <= 0 to 0 at u >= 1."""
    u = np.asarray(u, dtype=float)
    lo = np.exp(-1.0 / np.maximum(u, 1e-300))
    hi = np.exp(-1.0 / np.maximum(1.0 - u, 1e-300))
    lo = np.where(u > 0.0, lo, 0.0)
    hi = np.where(u < 1.0, hi, 0.0)
    return hi / (lo + hi)


def _smooth_step_deriv(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    uc = np.where(inside, u, 0.5)
    lo = np.exp(-1.0 / uc)
    hi = np.exp(-1.0 / (1.0 - uc))
    d = -lo * hi * (uc**-2 + (1.0 - uc) ** -2) / (lo + hi) ** 2
    return np.where(inside, d, 0.0)


def _lattice_interp(
    values: np.ndarray, t0: float, dt: float, x0: float, dx: float
) -> Field2D:
    """Clamped bilinear evaluator over a uniform lattice."""
    nt, nx = values.shape

    def ev(t: np.ndarray, x: np.ndarray) -> np.ndarray:
        ft = np.clip((np.asarray(t, dtype=float) - t0) / dt, 0.0, nt - 1.0)
        fx = np.clip((np.asarray(x, dtype=float) - x0) / dx, 0.0, nx - 1.0)
        ft, fx = np.broadcast_arrays(ft, fx)
        i = np.minimum(ft.astype(int), nt - 2)
        j = np.minimum(fx.astype(int), nx - 2)
        at = ft - i
        ax = fx - j
        return (
            (1.0 - at) * (1.0 - ax) * values[i, j]
            + (1.0 - at) * ax * values[i, j + 1]
            + at * (1.0 - ax) * values[i + 1, j]
            + at * ax * values[i + 1, j + 1]
        )

    return ev


# ---------------------------------------------------------------------------
# field extension
# ---------------------------------------------------------------------------


def extend_fields(f: FieldPair, P: Potential, g: SpaceTimeGrid | None = None) -> ExtendedFields:
    """Extend (rho, b rho) to the whole plane.

    Density 1 laterally and rho(T, .) after the final time; flux equal
    to the signed boundary traces laterally, zero after the final time.
    The lateral flux values keep the extended pair divergence-free
    across the boundary lines.
    """
    grid = f.grid
    if g is not None and g != grid:
        raise ValueError("grid does not match the field pair")
    if P.values.shape != (grid.nt, grid.nx):
        raise ValueError("potential does not match the field pair")
    flux = f.b * f.rho
    rho_ev = _lattice_interp(f.rho, 0.0, grid.dt, grid.x_min, grid.dx)
    flux_ev = _lattice_interp(flux, 0.0, grid.dt, grid.x_min, grid.dx)
    m_bound = float(max(f.b_sup, np.max(np.abs(flux))))

    def A(t: np.ndarray, x: np.ndarray) -> np.ndarray:
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        out = np.ones(t.shape)
        inside = (x >= grid.x_min) & (x <= grid.x_max)
        out[inside] = rho_ev(np.minimum(t[inside], grid.t_max), x[inside])
        return out

    def B(t: np.ndarray, x: np.ndarray) -> np.ndarray:
        # the lateral values equal the boundary-column flux profile, the
        # discrete realization of the signed traces; clamping x keeps B
        # continuous across the boundary lines, which the continuity of
        # the extended pair requires
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        out = np.zeros(t.shape)
        live = t <= grid.t_max
        out[live] = flux_ev(t[live], np.clip(x[live], grid.x_min, grid.x_max))
        return out

    return ExtendedFields(grid, A, B, m_bound)


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------


def _one_sided_conv(F: np.ndarray, weights: np.ndarray, axis: int, forward: bool) -> np.ndarray:
    """Convolve with taps at non-negative index offsets along one axis.

    forward=True samples increasing indices (future time / right in
    space), forward=False samples decreasing indices (left in space).
    """
    k_taps = weights.size - 1
    pad = [(0, 0), (0, 0)]
    pad[axis] = (0, k_taps) if forward else (k_taps, 0)
    G = np.pad(F, pad, mode="edge")
    out = np.zeros_like(F)
    n_axis = F.shape[axis]
    for k, w in enumerate(weights):
        if w == 0.0:
            continue
        start = k if forward else k_taps - k
        sl = [slice(None), slice(None)]
        sl[axis] = slice(start, start + n_axis)
        out += w * G[tuple(sl)]
    return out


def mollify(
    ext: ExtendedFields,
    data: BoundaryData,
    n: int,
    positive_b: bool = False,
    variant: str = "bv",
    refine: int = 4,
) -> MollifiedProblem:
    """Mollify the extended pair at index n on a refined padded lattice.

    General recipe: cutoff blend of the left-sampling and the
    right-sampling space kernels, so each boundary sees its exterior
    trace values; positive recipe: single left-sampling kernel with the
    1/n shim on both fields, valid when the flux is non-negative.
    """
    if n < 1:
        raise ValueError("mollification index must be at least 1")
    g = ext.grid
    df_t = g.dt / refine
    df_x = g.dx / refine
    k_t = max(4, int(np.ceil(1.0 / (n * df_t))))
    k_x = max(4, int(np.ceil(1.0 / (n * df_x))))
    margin = int(np.ceil(ext.m_bound * g.dt / df_x)) + 2

    nt_f = refine * (g.nt - 1) + 1 + k_t + 2
    pad_x = k_x + margin + 2
    nx_f = refine * (g.nx - 1) + 1 + 2 * pad_x
    t0 = 0.0
    x0 = g.x_min - pad_x * df_x
    tt = (t0 + df_t * np.arange(nt_f))[:, None]
    xx = (x0 + df_x * np.arange(nx_f))[None, :]
    AF = ext.A(tt, xx)
    BF = ext.B(tt, xx)

    w_t = _tap_weights(k_t)
    w_x = _tap_weights(k_x)
    A_t = _one_sided_conv(AF, w_t, axis=0, forward=True)
    B_t = _one_sided_conv(BF, w_t, axis=0, forward=True)
    A_left = _one_sided_conv(A_t, w_x, axis=1, forward=False)
    B_left = _one_sided_conv(B_t, w_x, axis=1, forward=False)
    # continuity defect of the mollified pair over the physical window:
    # the divergence of each convolved pair vanishes, so only the cutoff
    # commutator survives, and the single-kernel recipe has none
    i_hi = refine * (g.nt - 1)
    win = (slice(0, i_hi + 1), slice(pad_x, pad_x + refine * (g.nx - 1) + 1))
    if positive_b:
        rho_sm = A_left
        Bn = B_left + 1.0 / n
        h_sup = 0.0
        h_l1 = 0.0
    else:
        A_right = _one_sided_conv(A_t, w_x, axis=1, forward=True)
        B_right = _one_sided_conv(B_t, w_x, axis=1, forward=True)
        delta = (g.x_max - g.x_min) / 10.0
        scale = g.x_max - g.x_min - 2.0 * delta
        u_blend = ((x0 + df_x * np.arange(nx_f)) - (g.x_min + delta)) / scale
        zeta = _smooth_step(u_blend)[None, :]
        zeta_prime = (_smooth_step_deriv(u_blend) / scale)[None, :]
        rho_sm = zeta * A_left + (1.0 - zeta) * A_right
        Bn = zeta * B_left + (1.0 - zeta) * B_right
        h = (zeta_prime * (B_left - B_right))[win]
        h_sup = float(np.max(np.abs(h)))
        h_l1 = float(np.sum(np.abs(h)) * df_t * df_x)
    rho_f = rho_sm + 1.0 / n
    b_f = Bn / rho_f

    return MollifiedProblem(
        n=n,
        rho_n=_lattice_interp(rho_f, t0, df_t, x0, df_x),
        rho_smooth=_lattice_interp(rho_sm, t0, df_t, x0, df_x),
        b_n=_lattice_interp(b_f, t0, df_t, x0, df_x),
        bn_sup=float(np.max(np.abs(b_f))),
        data_n=smooth_data(data, n, variant),
        h_sup=h_sup,
        h_l1=h_l1,
    )


# ---------------------------------------------------------------------------
# data smoothing
# ---------------------------------------------------------------------------

_QUAD_TAPS = 64
_DATA_SAMPLES = 4097


def smooth_data(data: BoundaryData, n: int, variant: str = "bv") -> BoundaryData:
    """Pad the data past its endpoints and mollify with the future/right kernel.

    Variant bv pads with the matching one-sided limits, preserving the
    total-variation budget; variant vanishing pads with zero and also
    kills a 2/n collar, trading the BV bound for plain boundedness.
    """
    if variant not in ("bv", "vanishing"):
        raise ValueError("variant must be 'bv' or 'vanishing'")
    if n < 1:
        raise ValueError("mollification index must be at least 1")
    w = 1.0 / n
    taps = np.arange(_QUAD_TAPS + 1) / _QUAD_TAPS
    wgt = _tap_weights(_QUAD_TAPS)

    def mollify_profile(star, lo: float, hi: float) -> np.ndarray:
        s = np.linspace(lo, hi, _DATA_SAMPLES)
        probe = s[:, None] + w * taps[None, :]
        return np.asarray(star(probe) @ wgt, dtype=float)

    def left_star(t):
        t = np.asarray(t, dtype=float)
        early = data.init_left_limit() if variant == "bv" else 0.0
        late = data.left_final_limit() if variant == "bv" else 0.0
        return np.where(
            t < 2.0 / n, early, np.where(t > data.t_max, late, data.left_at(np.minimum(t, data.t_max)))
        )

    def right_star(t):
        t = np.asarray(t, dtype=float)
        early = data.init_right_limit() if variant == "bv" else 0.0
        late = data.right_final_limit() if variant == "bv" else 0.0
        return np.where(
            t < 2.0 / n, early, np.where(t > data.t_max, late, data.right_at(np.minimum(t, data.t_max)))
        )

    def init_star(x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, data.x_min, data.x_max)
        inner = data.initial_at(xc)
        if variant == "bv":
            return inner
        collar = (x < data.x_min + 2.0 / n) | (x > data.x_max - 2.0 / n)
        return np.where(collar, 0.0, inner)

    return BoundaryData(
        theta_init=mollify_profile(init_star, data.x_min, data.x_max),
        theta_left=mollify_profile(left_star, 0.0, data.t_max),
        theta_right=mollify_profile(right_star, 0.0, data.t_max),
        t_max=data.t_max,
        x_min=data.x_min,
        x_max=data.x_max,
    )


# ---------------------------------------------------------------------------
# smooth transport solve
# ---------------------------------------------------------------------------


def solve_smooth(mp: MollifiedProblem, g: SpaceTimeGrid) -> np.ndarray:
    """theta_n on the lattice by backward RK4 characteristics.

    Every node integrates dx/ds = b_n(s, x) backward with step dt/4; a
    characteristic reaching a lateral boundary reads that side's datum
    at the (linearly interpolated) crossing time, one surviving to
    s = 0 reads the initial datum at its foot.  All nodes sharing a
    substep advance together.
    """
    sub = 4
    h = g.dt / sub
    if not np.isfinite(h) or h <= 0.0:
        raise RuntimeError("step-size underflow in the smooth solve")
    data = mp.data_n
    xs = g.xs()
    out = np.empty(g.nt * g.nx)
    out[:g.nx] = data.initial_at(xs)

    pos = np.empty(0)
    node = np.empty(0, dtype=np.int64)
    n_steps = (g.nt - 1) * sub
    for k in range(n_steps, 0, -1):
        s = k * h
        if k % sub == 0:
            level = k // sub
            pos = np.concatenate([pos, xs])
            node = np.concatenate([node, level * g.nx + np.arange(g.nx)])
        k1 = mp.b_n(s, pos)
        k2 = mp.b_n(s - 0.5 * h, pos - 0.5 * h * k1)
        k3 = mp.b_n(s - 0.5 * h, pos - 0.5 * h * k2)
        k4 = mp.b_n(s - h, pos - h * k3)
        new = pos - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        hit_left = new <= g.x_min
        hit_right = new >= g.x_max
        for hit, bound, read in (
            (hit_left, g.x_min, data.left_at),
            (hit_right, g.x_max, data.right_at),
        ):
            if not np.any(hit):
                continue
            gap = pos[hit] - new[hit]
            frac = np.where(np.abs(gap) > 0.0, (pos[hit] - bound) / np.where(gap == 0.0, 1.0, gap), 1.0)
            t_cross = s - h * np.clip(frac, 0.0, 1.0)
            out[node[hit]] = read(t_cross)
        alive = ~(hit_left | hit_right)
        pos = new[alive]
        node = node[alive]
    if node.size:
        out[node] = data.initial_at(pos)
    return out.reshape(g.nt, g.nx)


def oracle_solution(
    f: FieldPair,
    P: Potential,
    data: BoundaryData,
    n: int,
    positive_b: bool | None = None,
    variant: str = "bv",
) -> tuple[MollifiedProblem, np.ndarray, np.ndarray]:
    """Full pipeline: extension, mollification, smooth solve.

    By default the single-kernel recipe is used whenever the flux is
    non-negative on the lattice (its premise), else the cutoff blend.
    Returns the mollified problem, theta_n on the lattice, and the
    smooth (shim-free) density on the lattice, whose product with
    theta_n is the approximation of rho theta.
    """
    if positive_b is None:
        positive_b = bool(np.min(f.b * f.rho) >= 0.0)
    ext = extend_fields(f, P)
    mp = mollify(ext, data, n, positive_b=positive_b, variant=variant)
    theta_n = solve_smooth(mp, f.grid)
    tt = f.grid.times()[:, None]
    xx = f.grid.xs()[None, :]
    rho_sm = mp.rho_smooth(tt, xx)
    return mp, theta_n, rho_sm
