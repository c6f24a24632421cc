"""Monotone envelope properties, mostly as hypothesis invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from transport1d import (
    envelope_restriction,
    lower_increasing_envelope,
    upper_decreasing_envelope,
)

samples = arrays(
    np.float64,
    st.integers(min_value=1, max_value=60),
    elements=st.floats(min_value=-50.0, max_value=50.0,
                       allow_nan=False, allow_infinity=False),
)


@given(samples)
def test_upper_is_smallest_decreasing_majorant(f):
    env = upper_decreasing_envelope(f).values
    assert np.all(env[:-1] >= env[1:])
    assert np.all(env >= f)
    # suffix maxima: the pointwise-least values any non-increasing
    # majorant can take, hence equality characterizes the envelope
    suffix = np.maximum.accumulate(f[::-1])[::-1]
    np.testing.assert_array_equal(env, suffix)


@given(samples)
def test_lower_mirrors_upper(f):
    low = lower_increasing_envelope(f)
    up = upper_decreasing_envelope(-f)
    np.testing.assert_array_equal(low.values, -up.values)
    np.testing.assert_array_equal(low.contact, up.contact)


@given(samples)
def test_contact_points_realize_the_value(f):
    env = upper_decreasing_envelope(f)
    assert env.contact.any()
    assert np.all(np.abs(env.values[env.contact] - f[env.contact]) <= env.tol)
    # off contact the envelope is carried by a later sample, so it
    # continues flat to the right
    off = np.flatnonzero(~env.contact)
    off = off[off < f.size - 1]
    np.testing.assert_array_equal(env.values[off], env.values[off + 1])


@given(samples)
def test_idempotent(f):
    once = upper_decreasing_envelope(f).values
    twice = upper_decreasing_envelope(once).values
    np.testing.assert_array_equal(once, twice)
    assert upper_decreasing_envelope(once).contact.all()


@given(samples, st.data())
@settings(max_examples=200)
def test_restriction_never_changes_the_prefix(f, data):
    env = upper_decreasing_envelope(f)
    contacts = np.flatnonzero(env.contact)
    k_star = int(data.draw(st.sampled_from(list(contacts))))
    tau = int(data.draw(st.integers(min_value=k_star, max_value=f.size - 1)))
    assert envelope_restriction(f, k_star, tau) is True


def test_restriction_rejects_bad_anchors():
    f = np.array([0.0, 3.0, 1.0, 2.0])
    # index 0 is dominated by the later 3.0, so it is not a contact point
    assert not upper_decreasing_envelope(f).contact[0]
    with pytest.raises(ValueError, match="contact point"):
        envelope_restriction(f, 0, 3)
    with pytest.raises(ValueError):
        envelope_restriction(f, 2, 1)
    with pytest.raises(ValueError):
        envelope_restriction(f, 1, 7)


def test_empty_and_bad_tolerance_rejected():
    with pytest.raises(ValueError):
        upper_decreasing_envelope(np.array([]))
    with pytest.raises(ValueError):
        upper_decreasing_envelope(np.ones((2, 2)))
    with pytest.raises(ValueError):
        upper_decreasing_envelope(np.array([1.0]), tol=-1.0)


def test_plateau_contact_band():
    # values inside the tolerance band count as contact
    f = np.array([5.0, 5.0 - 1e-12, 3.0])
    env = upper_decreasing_envelope(f)
    assert env.contact[0] and env.contact[1] and env.contact[2]
