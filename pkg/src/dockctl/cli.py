"""``dockctl`` command line: run single docking scenarios or the four-pose suite.

Exit codes: 0 docked, 1 not docked, 2 usage or config error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import artifacts
from .config import ConfigError, load_scenarios
from .simulator import (
    BUILTIN_SCENARIOS,
    SENSOR_MODES,
    Scenario,
    builtin_scenario,
    run_scenario,
    run_suite,
    table2_suite,
)

EXIT_OK, EXIT_NOT_DOCKED, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3
DEFAULT_OUT = "dockctl_out"

log = logging.getLogger("dockctl")


@dataclasses.dataclass
class RunManifest:
    config_path: Optional[Path]
    output_dir: Path
    seed: int
    mode: Optional[str]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=SENSOR_MODES, default=None,
                   help="target-pose source: exact dock pose or simulated marker sensor")
    p.add_argument("--seed", type=int, default=0, help="sensor noise seed (default 0)")
    p.add_argument("--out", default=None,
                   help=f"output directory (default: $DOCKCTL_OUT or ./{DEFAULT_OUT})")
    p.add_argument("--horizon", type=int, default=None, help="override horizon length N")
    p.add_argument("--dt", type=float, default=None, help="override timestep in seconds")
    p.add_argument("--config", default=None, help="YAML scenario file")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dockctl", description="NMPC docking simulator for a differential-drive vehicle."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("scenario", nargs="?",
                     help=f"built-in name ({', '.join(BUILTIN_SCENARIOS)}) or path to a YAML file")
    _common(run)

    suite = sub.add_parser("suite", help="run the four-pose docking suite")
    suite.add_argument("--runs", type=int, default=1,
                       help="seeds per scenario, starting at --seed (default 1)")
    _common(suite)
    return parser


def _manifest(args: argparse.Namespace) -> RunManifest:
    out = args.out or os.environ.get("DOCKCTL_OUT") or DEFAULT_OUT
    return RunManifest(
        config_path=Path(args.config) if args.config else None,
        output_dir=Path(out),
        seed=args.seed,
        mode=args.mode,
    )


def _override(sc: Scenario, args: argparse.Namespace) -> Scenario:
    changes = {}
    if args.horizon is not None:
        changes["N"] = args.horizon
    if args.dt is not None:
        changes["dt"] = args.dt
    cfg = dataclasses.replace(sc.cfg, **changes) if changes else sc.cfg
    return sc.replace(
        cfg=cfg,
        seed=args.seed,
        sensor_mode=args.mode or sc.sensor_mode,
    )


def _resolve_run(args: argparse.Namespace) -> Scenario:
    source = args.config or args.scenario
    if source is None:
        raise ConfigError("give a built-in scenario name or --config <file>")
    if args.config is None and source in BUILTIN_SCENARIOS:
        return builtin_scenario(source, args.mode or "perfect", args.seed)
    scenarios = load_scenarios(source)
    if len(scenarios) != 1:
        if args.scenario:
            matches = [s for s in scenarios if s.name == args.scenario]
            if len(matches) == 1:
                return matches[0]
        raise ConfigError(f"{source} holds {len(scenarios)} scenarios; name one of them")
    return scenarios[0]


def cmd_run(args: argparse.Namespace) -> int:
    m = _manifest(args)
    sc = _override(_resolve_run(args), args)
    result = run_scenario(sc)
    csv_path = artifacts.write_trajectory_csv(result, m.output_dir / f"{sc.name}_trajectory.csv")
    json_path = artifacts.write_json(
        artifacts.result_record(result), m.output_dir / f"{sc.name}_result.json"
    )
    status = "docked" if result.docked else ("solver failure" if result.diverged else "not docked")
    print(
        f"{sc.name}: {status}; position error {result.final_position_error_m:.6f} m, "
        f"heading error {result.final_heading_error_deg:.6f} deg"
    )
    print(f"wrote {csv_path} and {json_path}")
    if result.diverged:
        print(result.diagnostic, file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK if result.docked else EXIT_NOT_DOCKED


def cmd_suite(args: argparse.Namespace) -> int:
    m = _manifest(args)
    if args.runs < 1:
        raise ConfigError("--runs must be at least 1")
    if m.config_path is not None:
        scenarios = load_scenarios(m.config_path)
    else:
        scenarios = table2_suite(args.mode or "perfect", args.seed)
    scenarios = [_override(sc, args) for sc in scenarios]
    seeds = [args.seed + i for i in range(args.runs)]
    summary = run_suite(scenarios, seeds)
    for row in summary.rows:
        if row.result is not None:
            artifacts.write_trajectory_csv(
                row.result, m.output_dir / f"{row.name.replace('#', '_')}_trajectory.csv"
            )
    path = artifacts.write_json(
        artifacts.summary_document(summary), m.output_dir / "suite_summary.json"
    )
    print(artifacts.format_table(summary))
    print(f"wrote {path}")
    if summary.any_diverged or any(r.error is not None for r in summary.rows):
        return EXIT_SOLVER
    return EXIT_OK if summary.all_docked else EXIT_NOT_DOCKED


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_suite(args)
    except ConfigError as exc:
        print(f"dockctl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"dockctl: error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
