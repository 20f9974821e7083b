"""Simulated fiducial-marker pose sensor for position-based visual servoing.

Stands in for the camera + marker detector: range gating per marker size,
a half-plane visibility test, and zero-mean Gaussian pose noise whose
positional spread grows linearly with range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .kinematics import VehicleState, wrap_angle

# marker edge (mm) -> (min, max) detection distance (mm)
DETECTION_RANGES_MM: dict[int, tuple[float, float]] = {
    50: (50.0, 1500.0),
    100: (90.0, 2840.0),
    150: (140.0, 3750.0),
}


class NoDetection(LookupError):
    """The sensor reading carries no marker observation."""


@dataclass(frozen=True)
class MarkerSpec:
    size_mm: float
    min_range_mm: float
    max_range_mm: float
    # position of the marker centre and the direction its face points
    world_pose: VehicleState

    def __post_init__(self) -> None:
        if not 0 < self.min_range_mm < self.max_range_mm:
            raise ValueError(
                f"need 0 < min_range_mm < max_range_mm, got "
                f"{self.min_range_mm}, {self.max_range_mm}"
            )

    @classmethod
    def standard(cls, size_mm: int, world_pose: VehicleState) -> "MarkerSpec":
        """Marker with the measured detection limits for a known printed size."""
        try:
            lo, hi = DETECTION_RANGES_MM[int(size_mm)]
        except KeyError:
            raise ValueError(
                f"no measured detection range for {size_mm} mm markers; "
                f"known sizes: {sorted(DETECTION_RANGES_MM)}"
            ) from None
        return cls(float(size_mm), lo, hi, world_pose)

    def in_range(self, distance_mm: float) -> bool:
        return self.min_range_mm <= distance_mm <= self.max_range_mm


@dataclass(frozen=True)
class NoiseModel:
    sigma0_mm: float = 2.0
    k_range: float = 0.005
    sigma_heading_rad: float = 0.01

    def __post_init__(self) -> None:
        if min(self.sigma0_mm, self.k_range, self.sigma_heading_rad) < 0:
            raise ValueError("noise parameters must be nonnegative")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.sigma0_mm == 0 and self.k_range == 0 and self.sigma_heading_rad == 0

    def position_sigma_m(self, distance_m: float) -> float:
        return (self.sigma0_mm + self.k_range * distance_m * 1000.0) / 1000.0


@dataclass(frozen=True)
class RelativePose:
    """Marker pose in the camera frame: centre position and facing angle."""

    x: float
    y: float
    heading: float

    @property
    def range(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def bearing(self) -> float:
        return math.atan2(self.y, self.x)


@dataclass(frozen=True)
class SensorReading:
    detected: bool
    relative_pose: Optional[RelativePose] = None
    noisy: bool = False

    def __post_init__(self) -> None:
        if not self.detected and self.relative_pose is not None:
            raise ValueError("an undetected reading cannot carry a pose")
        if self.detected and self.relative_pose is None:
            raise ValueError("a detected reading needs a pose")


IDENTITY_MOUNT = VehicleState(0.0, 0.0, 0.0)


def compose(a: VehicleState, b: VehicleState) -> VehicleState:
    """Pose ``b`` expressed in the frame of ``a``, mapped to the parent frame of ``a``."""
    c, s = math.cos(a.phi), math.sin(a.phi)
    return VehicleState(a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.phi + b.phi)


def relative(a: VehicleState, b: VehicleState) -> VehicleState:
    """Pose of ``b`` in the frame of ``a``; inverse of :func:`compose`."""
    c, s = math.cos(a.phi), math.sin(a.phi)
    dx, dy = b.x - a.x, b.y - a.y
    return VehicleState(c * dx + s * dy, -s * dx + c * dy, b.phi - a.phi)


def marker_faces(marker_pose: VehicleState, viewer_x: float, viewer_y: float) -> bool:
    """Half-plane test: the viewer sits on the side the marker face points to."""
    nx, ny = math.cos(marker_pose.phi), math.sin(marker_pose.phi)
    return nx * (marker_pose.x - viewer_x) + ny * (marker_pose.y - viewer_y) < 0.0


RngLike = Union[np.random.Generator, int, None]


def _as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def observe(
    true_vehicle: VehicleState,
    marker: MarkerSpec,
    noise: NoiseModel,
    rng: RngLike = None,
    mount: VehicleState = IDENTITY_MOUNT,
) -> SensorReading:
    """Simulate one marker detection from the vehicle's true pose.

    ``rng`` is a caller-owned generator (or a seed). Noise is drawn only
    for detected readings, so gaps do not advance the stream.
    """
    cam = compose(true_vehicle, mount)
    mp = marker.world_pose
    distance_m = math.hypot(mp.x - cam.x, mp.y - cam.y)
    # compare in metres so that limits like 2840 mm map onto 2.84 exactly
    in_range = marker.min_range_mm / 1000.0 <= distance_m <= marker.max_range_mm / 1000.0
    if not (in_range and marker_faces(mp, cam.x, cam.y)):
        return SensorReading(False)

    rel = relative(cam, mp)
    if noise.is_zero:
        return SensorReading(True, RelativePose(rel.x, rel.y, rel.phi), noisy=False)

    gen = _as_generator(rng)
    sigma = noise.position_sigma_m(distance_m)
    ex, ey, eh = gen.standard_normal(3)
    pose = RelativePose(
        rel.x + sigma * ex,
        rel.y + sigma * ey,
        wrap_angle(rel.phi + noise.sigma_heading_rad * eh),
    )
    return SensorReading(True, pose, noisy=True)


def estimate_target(
    reading: SensorReading,
    vehicle_estimate: VehicleState,
    standoff_m: float,
    mount: VehicleState = IDENTITY_MOUNT,
) -> VehicleState:
    """World-frame docking pose: ``standoff_m`` out along the marker normal, facing the marker."""
    if not reading.detected or reading.relative_pose is None:
        raise NoDetection("no marker in view")
    rp = reading.relative_pose
    marker_world = compose(compose(vehicle_estimate, mount), VehicleState(rp.x, rp.y, rp.heading))
    return VehicleState(
        marker_world.x + standoff_m * math.cos(marker_world.phi),
        marker_world.y + standoff_m * math.sin(marker_world.phi),
        marker_world.phi + math.pi,
    )


def marker_for_dock(dock: VehicleState, size_mm: int, standoff_m: float) -> MarkerSpec:
    """Place a standard marker ``standoff_m`` ahead of the dock pose, facing back at it."""
    pose = VehicleState(
        dock.x + standoff_m * math.cos(dock.phi),
        dock.y + standoff_m * math.sin(dock.phi),
        dock.phi + math.pi,
    )
    return MarkerSpec.standard(size_mm, pose)


def pose_error(x: VehicleState, x_doc: VehicleState) -> np.ndarray:
    """Pose error ``x - x_doc`` with the heading component wrapped to (-pi, pi]."""
    return np.array([x.x - x_doc.x, x.y - x_doc.y, wrap_angle(x.phi - x_doc.phi)])
