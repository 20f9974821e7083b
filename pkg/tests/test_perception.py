import math

import numpy as np
import pytest

from dockctl.kinematics import VehicleState
from dockctl.perception import (
    DETECTION_RANGES_MM,
    MarkerSpec,
    NoDetection,
    NoiseModel,
    SensorReading,
    compose,
    estimate_target,
    marker_faces,
    marker_for_dock,
    observe,
    pose_error,
    relative,
)

from oracles import random_pose

ORIGIN = VehicleState(0.0, 0.0, 0.0)
QUIET = NoiseModel.none()


def marker_ahead(size_mm, distance_m):
    """Marker on the +x axis, facing back toward the origin."""
    return MarkerSpec.standard(size_mm, VehicleState(distance_m, 0.0, math.pi))


def test_detection_examples():
    assert not observe(ORIGIN, marker_ahead(100, 3.0), QUIET).detected
    reading = observe(ORIGIN, marker_ahead(100, 1.0), QUIET)
    assert reading.detected and not reading.noisy
    rp = reading.relative_pose
    assert (rp.x, rp.y, abs(rp.heading)) == (1.0, 0.0, math.pi)
    assert not observe(ORIGIN, marker_ahead(50, 0.040), QUIET).detected


@pytest.mark.parametrize("size", [50, 100, 150])
def test_gating_follows_range_table(size):
    lo, hi = DETECTION_RANGES_MM[size]
    for d_mm, expected in [(lo, True), (hi, True), (lo - 1, False), (hi + 1, False), ((lo + hi) / 2, True)]:
        assert observe(ORIGIN, marker_ahead(size, d_mm / 1000.0), QUIET).detected is expected


def test_marker_seen_from_behind_is_not_detected():
    m = MarkerSpec.standard(100, VehicleState(1.0, 0.0, 0.0))  # facing away
    assert not marker_faces(m.world_pose, 0.0, 0.0)
    assert not observe(ORIGIN, m, QUIET).detected


def test_detection_ignores_vehicle_heading():
    m = marker_ahead(100, 1.0)
    assert observe(VehicleState(0, 0, math.pi), m, QUIET).detected


def test_marker_spec_validation():
    with pytest.raises(ValueError):
        MarkerSpec(100, 10, 5, ORIGIN)
    with pytest.raises(ValueError):
        MarkerSpec.standard(75, ORIGIN)


def test_reading_invariants():
    with pytest.raises(ValueError):
        SensorReading(False, relative_pose=observe(ORIGIN, marker_ahead(100, 1.0), QUIET).relative_pose)


def test_zero_noise_is_exact():
    rng = np.random.default_rng(0)
    dock = VehicleState(0, 0, -math.pi / 2)
    marker = marker_for_dock(dock, 150, 0.3)
    for _ in range(200):
        v = VehicleState(rng.uniform(-2, 2), rng.uniform(-0.2, 3), rng.uniform(-math.pi, math.pi))
        r = observe(v, marker, QUIET, rng)
        if not r.detected:
            continue
        truth = relative(v, marker.world_pose)
        rp = r.relative_pose
        assert abs(rp.x - truth.x) <= 1e-12 and abs(rp.y - truth.y) <= 1e-12
        assert abs(rp.heading - truth.phi) <= 1e-12
        est = estimate_target(r, v, 0.3)
        assert np.max(np.abs(pose_error(est, dock))) <= 1e-9


def test_noise_statistics():
    noise = NoiseModel(sigma0_mm=2.0, k_range=0.005, sigma_heading_rad=0.01)
    marker = marker_ahead(100, 1.5)
    rng = np.random.default_rng(123)
    xs, ys, hs = [], [], []
    for _ in range(10_000):
        r = observe(ORIGIN, marker, noise, rng)
        xs.append(r.relative_pose.x)
        ys.append(r.relative_pose.y)
        hs.append(math.remainder(r.relative_pose.heading - math.pi, 2 * math.pi))
    sigma = (2.0 + 0.005 * 1500.0) / 1000.0
    assert np.std(xs) == pytest.approx(sigma, rel=0.1)
    assert np.std(ys) == pytest.approx(sigma, rel=0.1)
    assert np.mean(xs) == pytest.approx(1.5, abs=3 * sigma / 100)
    assert np.std(hs) == pytest.approx(0.01, rel=0.1)


def test_seeded_observations_are_deterministic():
    noise = NoiseModel()
    marker = marker_ahead(100, 1.0)
    ga, gb = np.random.default_rng(9), np.random.default_rng(9)
    a = [observe(ORIGIN, marker, noise, ga) for _ in range(20)]
    b = [observe(ORIGIN, marker, noise, gb) for _ in range(20)]
    assert a == b
    assert len({r.relative_pose for r in a}) == 20
    assert observe(ORIGIN, marker, noise, 4) == observe(ORIGIN, marker, noise, 4)


def test_estimate_target_examples():
    r = observe(ORIGIN, marker_ahead(100, 1.0), QUIET)
    est = estimate_target(r, ORIGIN, 0.0)
    assert (est.x, est.y) == pytest.approx((1.0, 0.0), abs=1e-12)
    assert est.phi == pytest.approx(0.0, abs=1e-12)
    est = estimate_target(r, ORIGIN, 0.3)
    assert (est.x, est.y, est.phi) == pytest.approx((0.7, 0.0, 0.0), abs=1e-12)
    with pytest.raises(NoDetection):
        estimate_target(SensorReading(False), ORIGIN, 0.3)


def test_estimate_target_with_camera_offset():
    mount = VehicleState(0.2, 0.05, 0.1)
    dock = VehicleState(1.0, -0.5, 0.4)
    marker = marker_for_dock(dock, 100, 0.25)
    vehicle = VehicleState(-0.3, -0.8, 0.2)
    r = observe(vehicle, marker, QUIET, mount=mount)
    assert r.detected
    est = estimate_target(r, vehicle, 0.25, mount=mount)
    assert np.max(np.abs(pose_error(est, dock))) <= 1e-12


def test_compose_relative_round_trip():
    rng = np.random.default_rng(42)
    for _ in range(100):
        a, b = random_pose(rng, 5.0), random_pose(rng, 5.0)
        back = compose(a, relative(a, b))
        assert np.max(np.abs(pose_error(back, b))) <= 1e-9


@pytest.mark.parametrize(
    "x, x_doc, expected",
    [
        ((0.5, 0.5, 0.2), (0.5, 0.5, 0.2), (0, 0, 0)),
        ((1, 2, math.pi), (1, 2, -math.pi), (0, 0, 0)),
        ((0, 0, 0.1), (1, 0, -0.1), (-1, 0, 0.2)),
    ],
)
def test_pose_error(x, x_doc, expected):
    got = pose_error(VehicleState(*x), VehicleState(*x_doc))
    assert got == pytest.approx(expected, abs=1e-12)
