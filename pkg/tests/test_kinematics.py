import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dockctl.kinematics import (
    ControlInput,
    VehicleState,
    derivative,
    rollout,
    step,
    wrap_angle,
    wrap_angles,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
angles = st.floats(-50.0, 50.0, allow_nan=False)


@pytest.mark.parametrize(
    "theta, expected",
    [(3 * math.pi / 2, -math.pi / 2), (math.pi, math.pi), (-math.pi, math.pi), (0.0, 0.0)],
)
def test_wrap_angle_examples(theta, expected):
    assert wrap_angle(theta) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_wrap_angle_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        wrap_angle(bad)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_wrap_angle_range_and_congruence(theta):
    r = wrap_angle(theta)
    assert -math.pi < r <= math.pi
    k = (theta - r) / (2 * math.pi)
    assert abs(k - round(k)) < 1e-9 * max(1.0, abs(theta))


@given(st.lists(angles, min_size=1, max_size=20))
def test_vectorized_wrap_agrees(values):
    got = wrap_angles(np.array(values))
    want = np.array([wrap_angle(v) for v in values])
    # the two may pick different representatives only at the +-pi seam
    diff = np.abs(got - want)
    assert np.all((diff < 1e-12) | (np.abs(diff - 2 * math.pi) < 1e-12))


def test_state_constructor_normalizes_heading():
    assert VehicleState(0, 0, -math.pi).phi == math.pi
    assert VehicleState(0, 0, 3 * math.pi / 2).phi == pytest.approx(-math.pi / 2)
    with pytest.raises(ValueError):
        VehicleState(math.nan, 0, 0)
    with pytest.raises(ValueError):
        ControlInput(0.0, math.inf)


@pytest.mark.parametrize(
    "state, u, expected",
    [
        ((0, 0, 0), (1, 0), (1, 0, 0)),
        ((5, 5, math.pi / 2), (2, 0), (0, 2, 0)),
        ((0, 0, 0), (0, 0.5), (0, 0, 0.5)),
    ],
)
def test_derivative(state, u, expected):
    got = derivative(VehicleState(*state), ControlInput(*u))
    assert got == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "state, u, dt, expected",
    [
        ((0, 0, 0), (1, 0), 0.1, (0.1, 0, 0)),
        ((0, 0, math.pi / 2), (1, 0), 0.1, (0, 0.1, math.pi / 2)),
        ((0, 0, 0), (0, 0.5), 0.2, (0, 0, 0.1)),
    ],
)
def test_step(state, u, dt, expected):
    s = step(VehicleState(*state), ControlInput(*u), dt)
    assert (s.x, s.y, s.phi) == pytest.approx(expected, abs=1e-15)


def test_step_uses_pre_step_heading():
    s = step(VehicleState(0, 0, 0), ControlInput(1.0, 10.0), 0.1)
    assert (s.x, s.y) == (0.1, 0.0)
    assert s.phi == pytest.approx(1.0)


@pytest.mark.parametrize("dt", [0.0, -0.1])
def test_step_rejects_nonpositive_dt(dt):
    with pytest.raises(ValueError):
        step(VehicleState(0, 0, 0), ControlInput(1, 0), dt)


def test_rollout_examples():
    traj = rollout(VehicleState(0, 0, 0), [ControlInput(1, 0)] * 10, 0.1)
    assert len(traj) == 11
    assert (traj[-1].x, traj[-1].y, traj[-1].phi) == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)

    traj = rollout(VehicleState(0, 0, 0), [ControlInput(0, math.pi / 10)] * 10, 1.0)
    assert traj[-1].phi == pytest.approx(math.pi, abs=1e-12)
    assert (traj[-1].x, traj[-1].y) == (0.0, 0.0)

    controls = [ControlInput(1, 0.1)] * 20
    traj = rollout(VehicleState(0, 0, 0), controls, 0.1)
    s = VehicleState(0, 0, 0)
    for k, u in enumerate(controls):
        s = step(s, u, 0.1)
        assert traj[k + 1] == s


def test_rollout_rejects_empty():
    with pytest.raises(ValueError):
        rollout(VehicleState(0, 0, 0), [], 0.1)


states = st.builds(VehicleState, finite, finite, angles)
controls = st.builds(ControlInput, st.floats(-3, 3), st.floats(-3, 3))
dts = st.floats(1e-3, 1.0)


@given(states, st.floats(-5, 5), dts, st.integers(1, 30))
def test_pure_rotation_keeps_position(s, omega, dt, n):
    traj = rollout(s, [ControlInput(0.0, omega)] * n, dt)
    assert all((p.x, p.y) == (s.x, s.y) for p in traj)


@given(states, dts)
def test_zero_control_fixed_point(s, dt):
    assert step(s, ControlInput(0.0, 0.0), dt) == s


@given(states, st.lists(controls, min_size=1, max_size=25), dts)
def test_displacement_bound_and_heading_range(s, us, dt):
    traj = rollout(s, us, dt)
    vmax = max(abs(u.v) for u in us)
    for k, p in enumerate(traj):
        assert math.hypot(p.x - s.x, p.y - s.y) <= k * dt * vmax * (1 + 1e-12) + 1e-12
        assert -math.pi < p.phi <= math.pi


@settings(max_examples=50)
@given(states, controls)
def test_euler_difference_quotient_converges(s, u):
    # the exact flow over dt differs from the Euler step by O(dt^2)
    def exact(dt):
        # arc of radius v/omega written via sinc so small omega does not cancel
        half = 0.5 * u.omega * dt
        chord = u.v * dt * np.sinc(half / math.pi)
        mid = s.phi + half
        return np.array([s.x + chord * math.cos(mid), s.y + chord * math.sin(mid)])

    errs = []
    for dt in (1e-2, 5e-3):
        e = step(s, u, dt)
        errs.append(np.linalg.norm(np.array([e.x, e.y]) - exact(dt)))
    if errs[0] > 1e-12:
        assert errs[1] <= errs[0] / 2
