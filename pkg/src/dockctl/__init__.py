"""NMPC-based docking of a differential-drive vehicle with simulated marker feedback."""

from .kinematics import ControlInput, VehicleState, derivative, rollout, step, wrap_angle
from .nmpc import KeepoutRegion, NmpcController, OcpConfig, build_ocp, mpc_step, solve_ocp
from .objectives import Weights, distance_cost, heading_cost, stage_cost, total_cost
from .optimizer import NlpProblem, NlpSolution, SolverDiverged, SolverOptions, solve
from .perception import (
    MarkerSpec,
    NoDetection,
    NoiseModel,
    SensorReading,
    estimate_target,
    observe,
    pose_error,
)
from .simulator import Scenario, SimResult, docking_metrics, run_scenario, run_suite, table2_suite

__version__ = "0.1.0"
