"""Unicycle model of the differential-drive vehicle.

State is the planar pose ``(x, y, phi)``, input is ``(v, omega)``.
The discrete model is an explicit Euler step with the trigonometric
terms evaluated at the pre-step heading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Map an angle to its representative in (-pi, pi]."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    r = math.remainder(theta, TWO_PI)
    if r <= -math.pi:
        r = math.pi
    return r


def wrap_angles(theta: np.ndarray) -> np.ndarray:
    """Vectorized variant of :func:`wrap_angle` for internal array math."""
    return math.pi - np.mod(math.pi - np.asarray(theta, dtype=float), TWO_PI)


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class VehicleState:
    """Planar pose. ``phi`` is normalized to (-pi, pi] on construction."""

    x: float
    y: float
    phi: float

    def __post_init__(self) -> None:
        _check_finite(x=self.x, y=self.y, phi=self.phi)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "phi", wrap_angle(float(self.phi)))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.phi])

    @classmethod
    def from_degrees(cls, x: float, y: float, phi_deg: float) -> "VehicleState":
        return cls(x, y, math.radians(phi_deg))


@dataclass(frozen=True)
class ControlInput:
    v: float
    omega: float

    def __post_init__(self) -> None:
        _check_finite(v=self.v, omega=self.omega)
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "omega", float(self.omega))

    def as_array(self) -> np.ndarray:
        return np.array([self.v, self.omega])


def derivative(state: VehicleState, u: ControlInput) -> tuple[float, float, float]:
    """Continuous-time state rate ``(v cos phi, v sin phi, omega)``."""
    return (u.v * math.cos(state.phi), u.v * math.sin(state.phi), u.omega)


def step(state: VehicleState, u: ControlInput, dt: float) -> VehicleState:
    """One explicit Euler step of length ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    return VehicleState(
        state.x + dt * u.v * math.cos(state.phi),
        state.y + dt * u.v * math.sin(state.phi),
        state.phi + dt * u.omega,
    )


def rollout(
    state0: VehicleState, controls: Sequence[ControlInput], dt: float
) -> list[VehicleState]:
    """Propagate ``state0`` through ``controls``; returns ``len(controls) + 1`` states."""
    if len(controls) == 0:
        raise ValueError("control sequence must be non-empty")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    traj = [state0]
    for u in controls:
        traj.append(step(traj[-1], u, dt))
    return traj


def controls_from_array(z: np.ndarray) -> list[ControlInput]:
    """Unpack an interleaved ``[v0, w0, v1, w1, ...]`` vector."""
    z = np.asarray(z, dtype=float).reshape(-1, 2)
    return [ControlInput(v, w) for v, w in z.tolist()]


def controls_to_array(controls: Sequence[ControlInput]) -> np.ndarray:
    return np.array([[u.v, u.omega] for u in controls], dtype=float).reshape(-1)
