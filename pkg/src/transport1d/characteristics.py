"""Weak characteristic curves as level curves of the potential Q.

Each time level is resolved independently: the curve through the base
point (t_bar, x_bar) sits, at time t, at the smaller of the leftmost
level crossing inf{x : Q(t, x) > h_bar} (with inf of the empty set
+infinity) and a barrier x_bar + b_sup * |t - t_bar| growing at the
maximal field speed away from the base time, clamped to the domain.
The barrier pins the curve to its base point across plateaus of
Q(t, .); its two-sided form keeps the level identity
Q(t, position(t)) = h_bar valid on both sides of t_bar.  Collisions
with the lateral boundaries are located by linear interpolation
between time levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import FieldPair
from .potential import Potential


@dataclass(frozen=True)
class CharCurve:
    """A weak characteristic: level value, per-level positions, exit data."""

    base: tuple[float, float]
    h_bar: float
    positions: np.ndarray
    t_star: float
    t_upper: float
    collided_at: str | None


def _level_tol(h: np.ndarray) -> np.ndarray:
    return 1e-10 * (1.0 + np.abs(h))


def _locate_level(grid, t_bar: float) -> int:
    i = int(round(float(t_bar) / grid.dt))
    if not (0 <= i <= grid.nt - 1) or abs(float(t_bar) - i * grid.dt) > 1e-9 * max(grid.t_max, 1.0):
        raise ValueError("base time must lie on a grid time level")
    return i


def _row_level_inf(q_row: np.ndarray, h: np.ndarray, x_min: float, dx: float) -> np.ndarray:
    """Leftmost crossing of each level h within one non-decreasing Q row.

    Values within the level tolerance band count as not exceeding h; on
    plateaus the crossing lands at the left edge of the first cell that
    climbs strictly above the band.  Returns +inf where the row never
    exceeds the level.  Rows are monotone only up to quadrature noise,
    so the crossing is taken on the running max, which has the same
    first-exceedance points and keeps the search well-defined.
    """
    q_row = np.maximum.accumulate(q_row)
    target = h + _level_tol(h)
    j = np.searchsorted(q_row, target, side="right")
    s = np.full(h.shape, np.inf)
    hit = j < q_row.size
    if not np.any(hit):
        return s
    jj = j[hit]
    hh = h[hit]
    interior = jj > 0
    jl = np.where(interior, jj - 1, 0)
    denom = q_row[jj] - q_row[jl]
    frac = np.zeros(jj.shape)
    np.divide(hh - q_row[jl], denom, out=frac, where=denom > 0)
    frac = np.clip(frac, 0.0, 1.0)
    s[hit] = np.where(interior, x_min + (jl + frac) * dx, x_min)
    return s


def _positions_batch(
    P: Potential,
    b_sup: float,
    i_bar: int,
    x_bars: np.ndarray,
    i_lo: int = 0,
    i_hi: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw and clamped curve positions for bases sharing one time level.

    Returns (raw, pos, h) where raw/pos have one row per time level in
    [i_lo, i_hi] and one column per base.  raw is the pre-clamp value
    min(level crossing, barrier); pos clamps it to [x_min, x_max].
    """
    g = P.grid
    if i_hi is None:
        i_hi = g.nt - 1
    x_bars = np.asarray(x_bars, dtype=float)
    xs = g.xs()
    h = np.interp(x_bars, xs, P.values[i_bar])
    raw = np.empty((i_hi - i_lo + 1, x_bars.size))
    for i in range(i_lo, i_hi + 1):
        s = _row_level_inf(P.values[i], h, g.x_min, g.dx)
        barrier = x_bars + b_sup * abs(i - i_bar) * g.dt
        raw[i - i_lo] = np.minimum(s, barrier)
    pos = np.clip(raw, g.x_min, g.x_max)
    return raw, pos, h


def _first_exit(
    raw: np.ndarray,
    pos: np.ndarray,
    i_bar: int,
    i_lo: int,
    grid,
    downward: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Interpolated first boundary hit scanning away from the base row.

    Returns (t_exit, side) per base with side -1 (left), +1 (right) or 0
    when the curve stays strictly inside; t_exit defaults to the scan
    end time.  Hits interpolated exactly onto the scan-end level count
    as no collision for the downward scan (the entry time comparison is
    made against an open interval there).
    """
    m = raw.shape[1]
    k_bar = i_bar - i_lo
    outside = (raw <= grid.x_min) | (raw >= grid.x_max)
    if downward:
        rows = np.arange(k_bar - 1, -1, -1)
        default_t = i_lo * grid.dt
    else:
        rows = np.arange(k_bar + 1, raw.shape[0])
        default_t = (i_lo + raw.shape[0] - 1) * grid.dt
    t_exit = np.full(m, default_t)
    side = np.zeros(m, dtype=np.int8)
    if rows.size == 0:
        return t_exit, side
    sub = outside[rows]
    has = np.any(sub, axis=0)
    if not np.any(has):
        return t_exit, side
    first = np.argmax(sub, axis=0)
    k_hit = rows[first]
    cols = np.arange(m)
    step = -1 if downward else 1
    prev = pos[k_hit - step, cols]
    raw_hit = raw[k_hit, cols]
    left = raw_hit <= grid.x_min
    bound = np.where(left, grid.x_min, grid.x_max)
    denom = prev - raw_hit
    frac = np.ones(m)
    np.divide(prev - bound, denom, out=frac, where=denom != 0)
    frac = np.clip(frac, 0.0, 1.0)
    # the segment runs from the previous (interior) row at k_hit - step
    # toward the hit row; frac = 1 lands exactly on the hit row
    t_hit = (i_lo + k_hit - step * (1.0 - frac)) * grid.dt
    if downward:
        # a hit interpolated exactly onto the floor level is an entry, not a collision
        genuine = has & (t_hit > default_t + 1e-12 * max(grid.t_max, 1.0))
    else:
        genuine = has & (t_hit < default_t - 1e-12 * max(grid.t_max, 1.0))
    t_exit[genuine] = t_hit[genuine]
    side[genuine] = np.where(left[genuine], -1, 1)
    return t_exit, side


def level_curve(P: Potential, f: FieldPair, t_bar: float, x_bar: float) -> CharCurve:
    """Build the weak characteristic through (t_bar, x_bar).

    The base point must be strictly inside the grid; t_bar must sit on
    a grid time level.
    """
    g = P.grid
    i_bar = _locate_level(g, t_bar)
    if not (0 < i_bar < g.nt - 1) or not (g.x_min < x_bar < g.x_max):
        raise ValueError("interior base point required")
    raw, pos, h = _positions_batch(P, f.b_sup, i_bar, np.array([float(x_bar)]))
    t_star_arr, side_down = _first_exit(raw, pos, i_bar, 0, g, downward=True)
    t_upper_arr, side_up = _first_exit(raw, pos, i_bar, 0, g, downward=False)
    t_star = float(t_star_arr[0])
    t_upper = float(t_upper_arr[0])
    collided_at = None
    if side_down[0] != 0:
        collided_at = "left" if side_down[0] < 0 else "right"
    elif side_up[0] != 0:
        collided_at = "left" if side_up[0] < 0 else "right"
    return CharCurve(
        base=(i_bar * g.dt, float(x_bar)),
        h_bar=float(h[0]),
        positions=pos[:, 0],
        t_star=t_star,
        t_upper=t_upper,
        collided_at=collided_at,
    )


def exit_times(c: CharCurve) -> tuple[float, float, str | None]:
    """Entry/exit times of the curve and the boundary it collided with."""
    return c.t_star, c.t_upper, c.collided_at


def backward_scan(
    P: Potential,
    b_sup: float,
    i_bar: int,
    x_bars: np.ndarray,
    floor_level: int = 0,
) -> dict[str, np.ndarray]:
    """Backward collision bookkeeping for a batch of bases on one level.

    Returns arrays keyed t_star, side (-1/0/+1, 0 meaning the curve
    reaches the floor level strictly inside), pos_floor (the formula's
    value at the floor level, defined whether or not the curve collided)
    and h_bar.
    """
    g = P.grid
    raw, pos, h = _positions_batch(P, b_sup, i_bar, x_bars, i_lo=floor_level, i_hi=i_bar)
    t_star, side = _first_exit(raw, pos, i_bar, floor_level, g, downward=True)
    return {"t_star": t_star, "side": side, "pos_floor": pos[0], "h_bar": h}


def column_scan(
    P: Potential,
    b_sup: float,
    x_bar: float,
    floor_level: int = 0,
) -> dict[str, np.ndarray]:
    """Backward bookkeeping for bases (i, x_bar) at every level i.

    Streaming sweep sharing row work across all base levels; memory
    stays O(nt) so the full-resolution divergence study fits easily.
    """
    g = P.grid
    xs = g.xs()
    m = g.nt - floor_level
    levels = np.arange(floor_level, g.nt)
    h = np.array([np.interp(float(x_bar), xs, P.values[i]) for i in levels])
    pos = np.full(m, float(x_bar))
    collided = np.zeros(m, dtype=bool)
    side = np.zeros(m, dtype=np.int8)
    t_star = np.full(m, floor_level * g.dt)
    pos_floor = np.full(m, np.nan)
    tiny = 1e-12 * max(g.t_max, 1.0)
    for i in range(g.nt - 1, floor_level - 1, -1):
        k_active = i - floor_level  # bases with level index >= k_active are active
        act = slice(k_active, m)
        h_act = h[act]
        s = _row_level_inf(P.values[i], h_act, g.x_min, g.dx)
        barrier = x_bar + b_sup * (levels[act] - i) * g.dt
        raw = np.minimum(s, barrier)
        newly = slice(k_active + 1, m)  # exclude the base activated this row
        raw_new = raw[1:]
        prev = pos[newly]
        out = (~collided[newly]) & ((raw_new <= g.x_min) | (raw_new >= g.x_max))
        if np.any(out):
            left = raw_new <= g.x_min
            bound = np.where(left, g.x_min, g.x_max)
            denom = prev - raw_new
            frac = np.ones(raw_new.shape)
            np.divide(prev - bound, denom, out=frac, where=denom != 0)
            frac = np.clip(frac, 0.0, 1.0)
            # segment from the interior row i+1 down to row i; frac = 1 lands on row i
            t_hit = (i + 1 - frac) * g.dt
            genuine = out & (t_hit > floor_level * g.dt + tiny)
            idx = np.nonzero(genuine)[0] + k_active + 1
            collided[idx] = True
            side[idx] = np.where(left[genuine], -1, 1)
            t_star[idx] = t_hit[genuine]
        pos[act] = np.clip(raw, g.x_min, g.x_max)
    pos_floor[:] = pos
    return {"t_star": t_star, "side": side, "pos_floor": pos_floor, "h_bar": h, "levels": levels}


def division_points(
    P: Potential,
    f: FieldPair,
    t_bar: float,
    floor_level: int = 0,
) -> tuple[float, float]:
    """Positions splitting the base row into boundary-fed and interior-fed parts.

    x_alpha is the infimum, x_beta the supremum of the abscissas whose
    backward curve reaches the floor level strictly inside the domain;
    both are resolved to one grid cell using the monotonicity of curves
    in the base abscissa.  Curves left of x_alpha collide with the left
    boundary, curves right of x_beta with the right one.
    """
    g = P.grid
    i_bar = _locate_level(g, t_bar)
    if i_bar <= floor_level:
        raise ValueError("base time must lie strictly above the floor level")
    xs = g.xs()

    def collides(j: int, want_side: int) -> bool:
        res = backward_scan(P, f.b_sup, i_bar, xs[j : j + 1], floor_level)
        return int(res["side"][0]) == want_side

    def bisect(want_side: int) -> float:
        # want_side=-1: find the boundary between left-colliding bases and the
        # rest; want_side=+1: mirrored from the right edge
        if want_side == -1:
            lo, hi = 1, g.nx - 2
            if not collides(lo, -1):
                return g.x_min
            if collides(hi, -1):
                return float(xs[hi])
            # invariant: lo collides left, hi does not
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if collides(mid, -1):
                    lo = mid
                else:
                    hi = mid
            return float(xs[hi])
        lo, hi = 1, g.nx - 2
        if not collides(hi, 1):
            return g.x_max
        if collides(lo, 1):
            return float(xs[lo])
        # invariant: hi collides right, lo does not
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if collides(mid, 1):
                hi = mid
            else:
                lo = mid
        return float(xs[lo])

    x_alpha = bisect(-1)
    x_beta = bisect(1)
    if x_alpha > x_beta:
        raise RuntimeError(
            "no interior characteristic base survives to the floor level; "
            "curve construction bug"
        )
    return x_alpha, x_beta
