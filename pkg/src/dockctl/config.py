"""YAML scenario files.

A file holds one scenario mapping, or ``scenarios:`` with a list of them.
Every key is optional except ``initial_pose``; unknown keys are rejected::

    name: table2_s1
    initial_pose: {x: -1.5, y: 2.0, phi_deg: 90}
    dock_pose: {x: 0.0, y: 0.0, phi_deg: -90}
    sensor_mode: perfect          # or: simulated
    seed: 0
    t_max: 60
    pos_tol_m: 0.01
    head_tol_deg: 0.1
    marker: {size_mm: 100, standoff_m: 0.3}
    noise: {sigma0_mm: 2.0, k_range: 0.005, sigma_heading_rad: 0.01}
    ocp:
      N: 20
      dt: 0.1
      weights: {w_pos: 1.0, w_head: 0.5, r_v: 0.05, r_omega: 0.05}
      u_t: {v: 0.0, omega: 0.0}
      v_bounds: [-0.5, 2.0]
      omega_bounds: [-1.0, 1.0]
      keepout: [[-0.9, 0.3, 0.8, 1.3]]   # x_min, x_max, y_min, y_max
      keepout_weight: 1.0e5
      terminal_weight: 1000
      solver: {max_iter: 300, tol: 1.0e-8}
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any

import yaml

from .kinematics import ControlInput, VehicleState
from .nmpc import KeepoutRegion, OcpConfig
from .objectives import Weights
from .optimizer import SolverOptions
from .perception import MarkerSpec, NoiseModel, marker_for_dock
from .simulator import DEFAULT_DOCK, DEFAULT_STANDOFF_M, Scenario


class ConfigError(ValueError):
    pass


def _check_keys(section: str, data: Any, allowed: set[str]) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected a mapping, got {type(data).__name__}")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{section}: unknown keys {sorted(unknown)}")
    return data


def _pose(section: str, data: Any) -> VehicleState:
    d = _check_keys(section, data, {"x", "y", "phi_deg", "phi"})
    if "phi_deg" in d and "phi" in d:
        raise ConfigError(f"{section}: give phi or phi_deg, not both")
    phi = math.radians(float(d["phi_deg"])) if "phi_deg" in d else float(d.get("phi", 0.0))
    return VehicleState(float(d.get("x", 0.0)), float(d.get("y", 0.0)), phi)


def _pair(section: str, data: Any) -> tuple[float, float]:
    if not (isinstance(data, (list, tuple)) and len(data) == 2):
        raise ConfigError(f"{section}: expected [min, max]")
    return float(data[0]), float(data[1])


def parse_ocp(data: Any) -> OcpConfig:
    d = _check_keys(
        "ocp",
        data,
        {"N", "dt", "weights", "u_t", "v_bounds", "omega_bounds", "keepout",
         "keepout_weight", "terminal_weight", "solver"},
    )
    cfg = OcpConfig()
    if "N" in d:
        cfg.N = int(d["N"])
    if "dt" in d:
        cfg.dt = float(d["dt"])
    if "weights" in d:
        w = _check_keys("ocp.weights", d["weights"], {"w_pos", "w_head", "r_v", "r_omega"})
        cfg.weights = Weights(**{k: float(v) for k, v in w.items()})
    if "u_t" in d:
        u = _check_keys("ocp.u_t", d["u_t"], {"v", "omega"})
        cfg.u_t = ControlInput(float(u.get("v", 0.0)), float(u.get("omega", 0.0)))
    if "v_bounds" in d:
        cfg.v_bounds = _pair("ocp.v_bounds", d["v_bounds"])
    if "omega_bounds" in d:
        cfg.omega_bounds = _pair("ocp.omega_bounds", d["omega_bounds"])
    if "keepout" in d:
        regions = []
        for i, box in enumerate(d["keepout"] or []):
            if not (isinstance(box, (list, tuple)) and len(box) == 4):
                raise ConfigError(f"ocp.keepout[{i}]: expected [x_min, x_max, y_min, y_max]")
            regions.append(KeepoutRegion(*(float(b) for b in box)))
        cfg.keepout = regions
    if "keepout_weight" in d:
        cfg.keepout_weight = float(d["keepout_weight"])
    if "terminal_weight" in d:
        cfg.terminal_weight = float(d["terminal_weight"])
    if "solver" in d:
        s = _check_keys("ocp.solver", d["solver"], {"max_iter", "tol", "memory"})
        opts = SolverOptions(max_iter=300, tol=1e-8)
        if "max_iter" in s:
            opts.max_iter = int(s["max_iter"])
        if "tol" in s:
            opts.tol = float(s["tol"])
        if "memory" in s:
            opts.memory = int(s["memory"])
        cfg.solver = opts
    cfg.validate()
    return cfg


SCENARIO_KEYS = {
    "name", "initial_pose", "dock_pose", "sensor_mode", "seed", "t_max",
    "pos_tol_m", "head_tol_deg", "marker", "noise", "ocp",
}


def parse_scenario(data: Any, default_name: str = "scenario") -> Scenario:
    d = _check_keys("scenario", data, SCENARIO_KEYS)
    if "initial_pose" not in d:
        raise ConfigError("scenario: initial_pose is required")
    dock = _pose("dock_pose", d["dock_pose"]) if "dock_pose" in d else DEFAULT_DOCK
    m = _check_keys("marker", d.get("marker", {}), {"size_mm", "standoff_m", "min_range_mm", "max_range_mm"})
    standoff = float(m.get("standoff_m", DEFAULT_STANDOFF_M))
    marker = marker_for_dock(dock, int(m.get("size_mm", 100)), standoff)
    if "min_range_mm" in m or "max_range_mm" in m:
        marker = MarkerSpec(
            marker.size_mm,
            float(m.get("min_range_mm", marker.min_range_mm)),
            float(m.get("max_range_mm", marker.max_range_mm)),
            marker.world_pose,
        )
    kwargs: dict[str, Any] = dict(
        name=str(d.get("name", default_name)),
        initial_pose=_pose("initial_pose", d["initial_pose"]),
        dock_pose=dock,
        marker=marker,
        standoff_m=standoff,
        cfg=parse_ocp(d.get("ocp", {})),
    )
    if "noise" in d:
        n = _check_keys("noise", d["noise"], {"sigma0_mm", "k_range", "sigma_heading_rad"})
        kwargs["noise"] = NoiseModel(**{k: float(v) for k, v in n.items()})
    for key in ("t_max", "pos_tol_m"):
        if key in d:
            kwargs[key] = float(d[key])
    if "head_tol_deg" in d:
        kwargs["head_tol_rad"] = math.radians(float(d["head_tol_deg"]))
    if "sensor_mode" in d:
        kwargs["sensor_mode"] = str(d["sensor_mode"])
    if "seed" in d:
        kwargs["seed"] = int(d["seed"])
    return Scenario(**kwargs)


def load_scenarios(path: str | Path) -> list[Scenario]:
    """Parse a scenario file; raises :class:`ConfigError` on any problem."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    try:
        if isinstance(data, dict) and "scenarios" in data:
            _check_keys("file", data, {"scenarios"})
            items = data["scenarios"]
            if not isinstance(items, list) or not items:
                raise ConfigError("scenarios: expected a non-empty list")
            return [parse_scenario(item, f"{path.stem}_{i}") for i, item in enumerate(items)]
        return [parse_scenario(data, path.stem)]
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
