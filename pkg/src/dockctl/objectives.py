"""Cost terms for the docking optimal control problem."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kinematics import ControlInput, VehicleState, rollout, wrap_angle


@dataclass(frozen=True)
class Weights:
    """Diagonal weights on position, wrapped heading, and control effort."""

    w_pos: float = 1.0
    w_head: float = 0.5
    r_v: float = 0.05
    r_omega: float = 0.05

    def __post_init__(self) -> None:
        values = (self.w_pos, self.w_head, self.r_v, self.r_omega)
        if any(not math.isfinite(w) or w < 0 for w in values):
            raise ValueError(f"weights must be finite and nonnegative: {values}")
        if not (self.w_pos > 0 or self.w_head > 0):
            raise ValueError("at least one of w_pos, w_head must be positive")

    def scaled(self, factor: float) -> "Weights":
        return Weights(
            self.w_pos * factor,
            self.w_head * factor,
            self.r_v * factor,
            self.r_omega * factor,
        )


def distance_cost(p_veh: Sequence[float], p_doc: Sequence[float]) -> float:
    """Squared Euclidean distance between two planar points."""
    dx = float(p_veh[0]) - float(p_doc[0])
    dy = float(p_veh[1]) - float(p_doc[1])
    return dx * dx + dy * dy


def heading_cost(phi_veh: float, phi_doc: float) -> float:
    """Angular deviation ``pi - ||d| - pi|`` with ``d`` wrapped; lies in [0, pi]."""
    d = wrap_angle(phi_veh - phi_doc)
    return math.pi - abs(abs(d) - math.pi)


def state_cost(state: VehicleState, target: VehicleState, w: Weights) -> float:
    f1 = distance_cost((state.x, state.y), (target.x, target.y))
    f2 = heading_cost(state.phi, target.phi)
    return w.w_pos * f1 + w.w_head * f2 * f2


def control_cost(u: ControlInput, u_t: ControlInput, w: Weights) -> float:
    dv = u.v - u_t.v
    dw = u.omega - u_t.omega
    return w.r_v * dv * dv + w.r_omega * dw * dw


def stage_cost(
    state: VehicleState,
    u: ControlInput,
    target: VehicleState,
    u_t: ControlInput,
    w: Weights,
) -> float:
    return state_cost(state, target, w) + control_cost(u, u_t, w)


def total_cost(
    x0: VehicleState,
    controls: Sequence[ControlInput],
    target: VehicleState,
    u_t: ControlInput,
    w: Weights,
    dt: float,
    terminal_weight: float = 0.0,
) -> float:
    """Sum of stage costs over the horizon; stage ``k`` pairs state ``k`` with control ``k``.

    With ``terminal_weight > 0`` the state term evaluated at the final
    predicted state is added, scaled by that factor.
    """
    traj = rollout(x0, controls, dt)
    total = 0.0
    for s, u in zip(traj[:-1], controls):
        total += state_cost(s, target, w) + control_cost(u, u_t, w)
    if terminal_weight:
        total += terminal_weight * state_cost(traj[-1], target, w)
    return total
