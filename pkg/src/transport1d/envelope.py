"""Monotone envelopes of sampled profiles.

The upper non-increasing envelope of a sample is the smallest
non-increasing majorant; discretely that is the suffix maximum.  The
lower non-decreasing envelope mirrors it (suffix minimum).  Contact
indices, where the envelope touches the sample, drive the boundary
bookkeeping of the solver: between contacts an envelope is constant,
on contact runs it copies the sample's increments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Envelope:
    """Envelope samples plus the contact mask and the band used for it."""

    values: np.ndarray
    contact: np.ndarray
    kind: str
    tol: float


def _prepare(f: np.ndarray, tol: float | None) -> tuple[np.ndarray, float]:
    v = np.asarray(f, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("envelope expects a non-empty 1D sample")
    if tol is None:
        tol = 1e-10 * (1.0 + float(np.max(np.abs(v))))
    if tol < 0.0:
        raise ValueError("tolerance must be non-negative")
    return v, float(tol)


def upper_decreasing_envelope(f: np.ndarray, tol: float | None = None) -> Envelope:
    """Smallest non-increasing majorant of f, as suffix maxima."""
    v, tol = _prepare(f, tol)
    values = np.maximum.accumulate(v[::-1])[::-1]
    contact = values - v <= tol
    return Envelope(values, contact, "upper_decreasing", tol)


def lower_increasing_envelope(f: np.ndarray, tol: float | None = None) -> Envelope:
    """Greatest non-decreasing minorant of f, as suffix minima."""
    v, tol = _prepare(f, tol)
    values = np.minimum.accumulate(v[::-1])[::-1]
    contact = v - values <= tol
    return Envelope(values, contact, "lower_increasing", tol)


def envelope_restriction(
    f: np.ndarray, k_star: int, tau_idx: int, tol: float | None = None
) -> bool:
    """Check that truncating the sample after tau_idx leaves the envelope
    unchanged up to a contact index k_star <= tau_idx.

    The envelope value at a contact point is realized at that point, so
    discarding the tail beyond any later index cannot change the envelope
    before it; this executable form of that fact returns True whenever
    the inputs satisfy the stated preconditions.
    """
    v, tol = _prepare(f, tol)
    if not (0 <= k_star <= tau_idx < v.size):
        raise ValueError("need 0 <= k_star <= tau_idx < len(f)")
    full = upper_decreasing_envelope(v, tol)
    if not full.contact[k_star]:
        raise ValueError("restriction point must be a contact point")
    prefix = upper_decreasing_envelope(v[: tau_idx + 1], tol)
    return bool(np.max(np.abs(prefix.values[: k_star + 1] - full.values[: k_star + 1])) <= tol)
