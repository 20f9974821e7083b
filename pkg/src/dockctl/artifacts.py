"""CSV trajectory logs and JSON result/summary documents."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional

from .simulator import SimResult, SuiteSummary

CSV_HEADER = ("t", "x", "y", "phi", "v", "omega", "cost", "kkt", "iterations")


def _g(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.9g}"


def _num(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(f"{value:.12g}")


def trajectory_rows(result: SimResult) -> list[list[str]]:
    """One row per tick; the last row holds the final state and no control."""
    rows = []
    for k, (t, s) in enumerate(zip(result.times, result.trajectory)):
        row = [_g(t), _g(s.x), _g(s.y), _g(s.phi)]
        if k < len(result.controls):
            u = result.controls[k]
            st = result.per_step[k]
            row += [_g(u.v), _g(u.omega), _g(st.cost), _g(st.kkt), str(st.iterations)]
        else:
            row += ["", "", "", "", ""]
        rows.append(row)
    return rows


def write_trajectory_csv(result: SimResult, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(trajectory_rows(result))
    return path


def result_record(result: SimResult) -> dict:
    return {
        "name": result.name,
        "docked": result.docked,
        "t_dock": _num(result.t_dock),
        "position_error_m": _num(result.final_position_error_m),
        "heading_error_deg": _num(result.final_heading_error_deg),
        "ticks": len(result.controls),
        "diagnostic": result.diagnostic,
    }


def summary_document(summary: SuiteSummary) -> dict:
    return {
        "scenarios": [
            {
                "name": r.name,
                "docked": r.docked,
                "t_dock": _num(r.t_dock),
                "position_error_m": _num(r.position_error_m),
                "heading_error_deg": _num(r.heading_error_deg),
            }
            for r in summary.rows
        ],
        "average": {
            "position_error_m": _num(summary.mean_position_error_m),
            "heading_error_deg": _num(summary.mean_heading_error_deg),
            "docked": summary.n_docked,
            "runs": len(summary.rows),
        },
    }


def write_json(doc: dict, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def format_table(summary: SuiteSummary) -> str:
    """Plain-text table of per-scenario errors followed by the average row."""
    lines = [
        f"{'Scenario':<18}{'Initial pose (x, y, phi)':<28}{'Pos. error (m)':>16}{'Head. error (deg)':>19}{'Docked':>8}",
    ]
    for r in summary.rows:
        pose = ""
        if r.result is not None and r.result.trajectory:
            s0 = r.result.trajectory[0]
            pose = f"({s0.x:.1f}, {s0.y:.1f}, {math.degrees(s0.phi):.0f} deg)"
        pos = "-" if r.position_error_m is None else f"{r.position_error_m:.8f}"
        head = "-" if r.heading_error_deg is None else f"{r.heading_error_deg:.8f}"
        lines.append(f"{r.name:<18}{pose:<28}{pos:>16}{head:>19}{'yes' if r.docked else 'no':>8}")
    mp = summary.mean_position_error_m
    mh = summary.mean_heading_error_deg
    lines.append(
        f"{'Average':<18}{'':<28}{'-' if mp is None else f'{mp:.6f}':>16}"
        f"{'-' if mh is None else f'{mh:.6f}':>19}{f'{summary.n_docked}/{len(summary.rows)}':>8}"
    )
    return "\n".join(lines)
