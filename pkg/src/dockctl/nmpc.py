"""Single-shooting transcription of the docking OCP and the receding-horizon loop.

Decision vector layout is ``[v_0, w_0, v_1, w_1, ..., v_{N-1}, w_{N-1}]``;
states are eliminated by forward Euler simulation, so the only
constraints left for the solver are the control boxes. Keep-out regions
enter as a quadratic penalty on penetration depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .kinematics import (
    ControlInput,
    VehicleState,
    controls_from_array,
    controls_to_array,
    rollout,
    wrap_angles,
)
from .objectives import Weights
from .optimizer import NlpProblem, SolverDiverged, SolverOptions, solve


@dataclass(frozen=True)
class KeepoutRegion:
    """Axis-aligned rectangular prohibited area."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate keep-out rectangle: {self}")

    def penetration(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Depth inside the rectangle (0 outside) and its partials wrt x and y."""
        depths = np.stack(
            [x - self.x_min, self.x_max - x, y - self.y_min, self.y_max - y]
        )
        edge = np.argmin(depths, axis=0)
        depth = np.maximum(depths[edge, np.arange(depths.shape[1])], 0.0)
        inside = depth > 0.0
        ddx = np.where(edge == 0, 1.0, np.where(edge == 1, -1.0, 0.0)) * inside
        ddy = np.where(edge == 2, 1.0, np.where(edge == 3, -1.0, 0.0)) * inside
        return depth, ddx, ddy

    def depth_at(self, x: float, y: float) -> float:
        return float(self.penetration(np.array([x]), np.array([y]))[0][0])


@dataclass
class OcpConfig:
    N: int = 20
    dt: float = 0.1
    weights: Weights = field(default_factory=Weights)
    u_t: ControlInput = field(default_factory=lambda: ControlInput(0.0, 0.0))
    v_bounds: tuple[float, float] = (-0.5, 2.0)
    omega_bounds: tuple[float, float] = (-1.0, 1.0)
    keepout: list[KeepoutRegion] = field(default_factory=list)
    # must dominate the terminal weight, otherwise the docking pull drags the plan through
    keepout_weight: float = 1e5
    # weight of the state term at the final predicted state; 0 gives the plain
    # stage sum, which stalls at a lateral offset of ~0.2 m near the dock
    terminal_weight: float = 1000.0
    solver: SolverOptions = field(default_factory=lambda: SolverOptions(max_iter=300, tol=1e-8))

    def validate(self) -> None:
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        # equal bounds are allowed; they pin the input (used by unreachable scenarios)
        if not self.v_bounds[0] <= self.v_bounds[1]:
            raise ValueError(f"invalid v bounds {self.v_bounds}")
        if not self.omega_bounds[0] <= self.omega_bounds[1]:
            raise ValueError(f"invalid omega bounds {self.omega_bounds}")
        if not self.keepout_weight >= 0:
            raise ValueError("keepout_weight must be nonnegative")
        if not self.terminal_weight >= 0:
            raise ValueError("terminal_weight must be nonnegative")


@dataclass
class SolveStats:
    iterations: int
    kkt_residual: float
    converged: bool


@dataclass
class MpcStepResult:
    u_apply: ControlInput
    predicted_trajectory: list[VehicleState]
    predicted_cost: float
    solve_stats: SolveStats


class DockingObjective:
    """Objective and adjoint gradient of the transcribed OCP for fixed ``x0`` and target."""

    def __init__(self, x0: VehicleState, target: VehicleState, cfg: OcpConfig):
        self.x0 = x0
        self.target = target
        self.cfg = cfg
        self.state_w = np.ones(cfg.N + 1)
        self.state_w[-1] = cfg.terminal_weight

    def value_and_grad(self, z: np.ndarray) -> tuple[float, np.ndarray]:
        cfg = self.cfg
        w = cfg.weights
        dt = cfg.dt
        n = cfg.N
        v = z[0::2]
        om = z[1::2]

        phi = np.empty(n + 1)
        phi[0] = self.x0.phi
        phi[1:] = self.x0.phi + dt * np.cumsum(om)
        c = np.cos(phi[:n])
        s = np.sin(phi[:n])
        x = np.empty(n + 1)
        y = np.empty(n + 1)
        x[0] = self.x0.x
        y[0] = self.x0.y
        x[1:] = self.x0.x + dt * np.cumsum(v * c)
        y[1:] = self.x0.y + dt * np.cumsum(v * s)

        ex = x - self.target.x
        ey = y - self.target.y
        eh = wrap_angles(phi - self.target.phi)
        dv = v - cfg.u_t.v
        dw = om - cfg.u_t.omega
        sw = self.state_w
        f = (
            float(np.dot(sw, w.w_pos * (ex * ex + ey * ey) + w.w_head * eh * eh))
            + w.r_v * float(dv.dot(dv))
            + w.r_omega * float(dw.dot(dw))
        )

        gx = 2.0 * w.w_pos * sw * ex
        gy = 2.0 * w.w_pos * sw * ey
        gphi = 2.0 * w.w_head * sw * eh

        if cfg.keepout and cfg.keepout_weight > 0:
            kw = cfg.keepout_weight
            for region in cfg.keepout:
                depth, ddx, ddy = region.penetration(x, y)
                f += kw * float(depth.dot(depth))
                gx += 2.0 * kw * depth * ddx
                gy += 2.0 * kw * depth * ddy

        # suffix sums: G[k] = sum_{m >= k} g[m]
        Gx = np.cumsum(gx[::-1])[::-1]
        Gy = np.cumsum(gy[::-1])[::-1]
        grad = np.empty(2 * n)
        grad[0::2] = 2.0 * w.r_v * dv + dt * (c * Gx[1:] + s * Gy[1:])
        total_phi = gphi
        total_phi[:n] += dt * v * (c * Gy[1:] - s * Gx[1:])
        Gphi = np.cumsum(total_phi[::-1])[::-1]
        grad[1::2] = 2.0 * w.r_omega * dw + dt * Gphi[1:]
        return f, grad

    def value(self, z: np.ndarray) -> float:
        return self.value_and_grad(np.asarray(z, dtype=float))[0]

    def gradient(self, z: np.ndarray) -> np.ndarray:
        return self.value_and_grad(np.asarray(z, dtype=float))[1]


def build_ocp(x0: VehicleState, target: VehicleState, cfg: OcpConfig) -> NlpProblem:
    """Transcribe the docking OCP for initial state ``x0`` into a box-constrained NLP."""
    cfg.validate()
    obj = DockingObjective(x0, target, cfg)
    lower = np.tile([cfg.v_bounds[0], cfg.omega_bounds[0]], cfg.N)
    upper = np.tile([cfg.v_bounds[1], cfg.omega_bounds[1]], cfg.N)
    return NlpProblem(
        dim=2 * cfg.N,
        objective=obj.value,
        gradient=obj.gradient,
        lower=lower,
        upper=upper,
        value_and_grad=obj.value_and_grad,
    )


def solve_ocp(
    x0: VehicleState,
    target: VehicleState,
    cfg: OcpConfig,
    warm_start: Optional[Sequence[ControlInput] | np.ndarray] = None,
) -> tuple[list[ControlInput], MpcStepResult]:
    problem = build_ocp(x0, target, cfg)
    if warm_start is None:
        z0 = np.zeros(problem.dim)
    else:
        z0 = (
            np.asarray(warm_start, dtype=float).reshape(-1)
            if isinstance(warm_start, np.ndarray)
            else controls_to_array(warm_start)
        )
        if z0.size != problem.dim:
            raise ValueError(
                f"warm start has {z0.size // 2} controls, expected {cfg.N}"
            )
    try:
        sol = solve(problem, z0, cfg.solver)
    except SolverDiverged as exc:
        raise SolverDiverged(
            f"OCP solve failed from x0={x0} toward {target}: {exc}", exc.last_iterate
        ) from exc
    controls = controls_from_array(sol.z_star)
    result = MpcStepResult(
        u_apply=controls[0],
        predicted_trajectory=rollout(x0, controls, cfg.dt),
        predicted_cost=sol.objective_value,
        solve_stats=SolveStats(sol.iterations, sol.kkt_residual, sol.converged),
    )
    return controls, result


@dataclass
class ControllerMemory:
    """Previous optimal control sequence, empty before the first solve."""

    previous: Optional[list[ControlInput]] = None


def shift_warm_start(previous: Sequence[ControlInput]) -> list[ControlInput]:
    """Drop the applied first control and hold the last one."""
    return list(previous[1:]) + [previous[-1]]


def mpc_step(
    estimate: tuple[VehicleState, VehicleState],
    cfg: OcpConfig,
    memory: ControllerMemory,
) -> MpcStepResult:
    """One receding-horizon iteration: solve from the estimate, keep the plan, return it.

    The solver starts from the previous plan shifted left by one step (last
    control held), or from the unshifted previous plan if that scores lower
    at the current estimate; all zeros on the first call.
    """
    x_veh, x_doc = estimate
    warm = None
    if memory.previous is not None and len(memory.previous) == cfg.N:
        shifted = controls_to_array(shift_warm_start(memory.previous))
        held = controls_to_array(memory.previous)
        # the shifted plan is the usual choice; the held plan wins when the state has not advanced
        obj = DockingObjective(x_veh, x_doc, cfg)
        warm = shifted if obj.value(shifted) <= obj.value(held) else held
    controls, result = solve_ocp(x_veh, x_doc, cfg, warm)
    memory.previous = controls
    return result


class NmpcController:
    """Stateful wrapper around :func:`mpc_step` for a single vehicle."""

    def __init__(self, cfg: OcpConfig):
        cfg.validate()
        self.cfg = cfg
        self.memory = ControllerMemory()

    def reset(self) -> None:
        self.memory = ControllerMemory()

    def __call__(self, x_veh: VehicleState, x_doc: VehicleState) -> MpcStepResult:
        return mpc_step((x_veh, x_doc), self.cfg, self.memory)
