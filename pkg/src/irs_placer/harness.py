"""Experiment runners and machine-readable result records.

Each runner executes one experiment on a validated scenario and returns a
RunRecord whose payload is fully deterministic given (config, seed): the
config echo makes every record re-runnable on its own. Timing is kept off
the serialized payload so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .config import ScenarioConfig
from .errors import ConfigValidationError
from .geometry import CandidateSet, build_candidate_grid
from .objective import ObjectiveContext, build_context
from .optimizer import (
    DEFAULT_ENUMERATION_CAP,
    Certificate,
    SelectionResult,
    check_submodularity,
    curvature_scan,
    exhaustive_place,
    greedy_place,
    lazy_greedy_place,
    optimality_bound,
    random_place,
)

SCHEMA = "irs-placer/result-v1"

PLACEMENT_COLUMNS = ("index", "r_m", "theta_rad", "x_m", "y_m", "marginal_gain")
SWEEP_COLUMNS = ("M", "f_greedy", "f_random_mean", "f_random_std", "bound_tight", "bound_loose")

_METHODS = {
    "greedy": greedy_place,
    "lazy": lazy_greedy_place,
    "exhaustive": exhaustive_place,
}


@dataclass
class RunRecord:
    """Self-contained result of one subcommand run.

    ``wall_clock_s`` is measured but deliberately excluded from the payload:
    records from identical (config, seed) runs must be byte-identical.
    """

    command: str
    method: str
    seed: int
    config: dict
    result: dict
    wall_clock_s: Optional[float] = field(default=None, compare=False)

    def to_payload(self) -> dict:
        return {
            "schema": SCHEMA,
            "units": {"angle": "radian", "distance": "meter"},
            "command": self.command,
            "method": self.method,
            "seed": self.seed,
            "config": self.config,
            "result": self.result,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2) + "\n"


def build_scenario(cfg: ScenarioConfig) -> tuple[CandidateSet, ObjectiveContext]:
    """Materialize the candidate grid and objective context of a scenario."""
    grid = build_candidate_grid(cfg.grid, cfg.scene)
    if cfg.budget > len(grid):
        raise ConfigValidationError(
            f"budget {cfg.budget} exceeds the {len(grid)} usable candidates"
        )
    ctx = build_context(
        grid, cfg.scene, cfg.array, cfg.reflectivity, phase_seed=cfg.phase_seed
    )
    return grid, ctx


def _chosen_rows(result: SelectionResult, grid: CandidateSet) -> list:
    rows = []
    for u, gain in zip(result.chosen, result.gains):
        cand = grid[u]
        rows.append(
            {
                "index": cand.index,
                "r_m": cand.range_m,
                "theta_rad": cand.azimuth_rad,
                "x_m": cand.position.x,
                "y_m": cand.position.y,
                "marginal_gain": gain,
            }
        )
    return rows


def _selection_payload(result: SelectionResult, grid: CandidateSet) -> dict:
    return {
        "chosen": _chosen_rows(result, grid),
        "gains": list(result.gains),
        "values": list(result.values),
        "final_value": result.final_value,
        "evaluations": result.evaluations,
    }


def _certificate_payload(cert: Certificate) -> dict:
    payload = {
        "curvature": cert.curvature,
        "tight_factor": cert.tight_factor,
        "loose_factor": cert.loose_factor,
    }
    if cert.optimum is not None:
        payload["optimum"] = cert.optimum
    return payload


def run_place(
    cfg: ScenarioConfig, method: str = "greedy", seed: int = 0, m: Optional[int] = None
) -> RunRecord:
    """Place ``m`` IRS platforms with the requested method."""
    if method not in ("greedy", "lazy", "random", "exhaustive"):
        raise ConfigValidationError(f"unknown method {method!r}")
    grid, ctx = build_scenario(cfg)
    m = cfg.budget if m is None else m
    if not 1 <= m <= len(grid):
        raise ConfigValidationError(f"budget {m} outside [1, {len(grid)}]")
    start = time.perf_counter()
    if method == "random":
        result = random_place(ctx, m, np.random.default_rng(seed))
    else:
        result = _METHODS[method](ctx, m)
    record = RunRecord(
        command="place",
        method=method,
        seed=seed,
        config=cfg.to_mapping(),
        result={"m": m, **_selection_payload(result, grid)},
        wall_clock_s=time.perf_counter() - start,
    )
    return record


def run_sweep(
    cfg: ScenarioConfig,
    m_max: Optional[int] = None,
    trials: int = 100,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> RunRecord:
    """Greedy-vs-random comparison for M = 1..m_max plus bound columns.

    One greedy run at m_max supplies all rows (greedy trajectories are
    prefix-nested). Bound columns carry factor * exhaustive optimum when the
    subset count fits under ``cap``, else the bare factors.
    """
    if trials < 1:
        raise ConfigValidationError("trials must be >= 1")
    grid, ctx = build_scenario(cfg)
    m_max = cfg.budget if m_max is None else m_max
    if not 1 <= m_max <= len(grid):
        raise ConfigValidationError(f"sweep limit {m_max} outside [1, {len(grid)}]")
    start = time.perf_counter()
    greedy = greedy_place(ctx, m_max)
    scan = curvature_scan(ctx)
    tight, loose = optimality_bound(scan.curvature)

    rng = np.random.default_rng(seed)
    rows = []
    for m in range(1, m_max + 1):
        finals = [random_place(ctx, m, rng).final_value for _ in range(trials)]
        if math.comb(len(grid), m) <= cap:
            optimum = exhaustive_place(ctx, m, cap=cap).final_value
            bound_tight, bound_loose = tight * optimum, loose * optimum
        else:
            bound_tight, bound_loose = tight, loose
        rows.append(
            {
                "M": m,
                "f_greedy": greedy.values[m - 1],
                "f_random_mean": float(np.mean(finals)),
                "f_random_std": float(np.std(finals)),
                "bound_tight": bound_tight,
                "bound_loose": bound_loose,
            }
        )
    return RunRecord(
        command="sweep",
        method="greedy",
        seed=seed,
        config=cfg.to_mapping(),
        result={
            "m_max": m_max,
            "trials": trials,
            "curvature": scan.curvature,
            "tight_factor": tight,
            "loose_factor": loose,
            "rows": rows,
        },
        wall_clock_s=time.perf_counter() - start,
    )


def run_curvature(cfg: ScenarioConfig, seed: int = 0) -> RunRecord:
    """Curvature of the scenario objective plus the bound factors it implies."""
    grid, ctx = build_scenario(cfg)
    start = time.perf_counter()
    scan = curvature_scan(ctx)
    tight, loose = optimality_bound(scan.curvature)
    cand = grid[scan.argmin_index]
    return RunRecord(
        command="curvature",
        method="exhaustive-scan",
        seed=seed,
        config=cfg.to_mapping(),
        result={
            "curvature": scan.curvature,
            "tight_factor": tight,
            "loose_factor": loose,
            "argmin_index": scan.argmin_index,
            "argmin_candidate": {
                "index": cand.index,
                "r_m": cand.range_m,
                "theta_rad": cand.azimuth_rad,
            },
            "excluded": list(scan.excluded),
        },
        wall_clock_s=time.perf_counter() - start,
    )


def run_compare(
    cfg: ScenarioConfig,
    m: Optional[int] = None,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> RunRecord:
    """Greedy vs exhaustive optimum, with the certificate chain asserted."""
    from .errors import NumericalError

    grid, ctx = build_scenario(cfg)
    m = cfg.budget if m is None else m
    if not 1 <= m <= len(grid):
        raise ConfigValidationError(f"budget {m} outside [1, {len(grid)}]")
    start = time.perf_counter()
    greedy = greedy_place(ctx, m)
    best = exhaustive_place(ctx, m, cap=cap)
    scan = curvature_scan(ctx)
    tight, loose = optimality_bound(scan.curvature)
    slack = 1e-9 * max(1.0, abs(best.final_value))
    chain_ok = (
        greedy.final_value >= tight * best.final_value - slack
        and tight * best.final_value >= loose * best.final_value - slack
    )
    if not chain_ok:
        raise NumericalError(
            f"certificate chain violated: greedy {greedy.final_value} < "
            f"{tight} * optimum {best.final_value}"
        )
    return RunRecord(
        command="compare",
        method="greedy-vs-exhaustive",
        seed=seed,
        config=cfg.to_mapping(),
        result={
            "m": m,
            "greedy": _selection_payload(greedy, grid),
            "exhaustive": _selection_payload(best, grid),
            "ratio": greedy.final_value / best.final_value,
            "certificate": _certificate_payload(
                Certificate(scan.curvature, tight, loose, optimum=best.final_value)
            ),
            "chain_ok": chain_ok,
        },
        wall_clock_s=time.perf_counter() - start,
    )


def run_check(cfg: ScenarioConfig, trials: int = 1000, seed: int = 0) -> RunRecord:
    """Randomized monotonicity / diminishing-returns verification."""
    if trials < 1:
        raise ConfigValidationError("trials must be >= 1")
    _, ctx = build_scenario(cfg)
    start = time.perf_counter()
    report = check_submodularity(ctx, trials, np.random.default_rng(seed))
    return RunRecord(
        command="check",
        method="sampled-chains",
        seed=seed,
        config=cfg.to_mapping(),
        result={
            "trials": report.trials,
            "tolerance": report.tolerance,
            "worst_monotonicity_margin": report.worst_monotonicity_margin,
            "worst_submodularity_margin": report.worst_submodularity_margin,
            "violation_count": report.violation_count,
            "passed": report.passed,
        },
        wall_clock_s=time.perf_counter() - start,
    )


def write_atomic(path: Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] for c in columns])
    return buf.getvalue()


def write_record(record: RunRecord, out_dir: Path) -> list:
    """Write result.json plus the command's CSV view; returns the paths written."""
    out_dir = Path(out_dir)
    written = [out_dir / "result.json"]
    write_atomic(written[0], record.to_json())
    if record.command == "place":
        path = out_dir / "placement.csv"
        write_atomic(path, _csv_text(PLACEMENT_COLUMNS, record.result["chosen"]))
        written.append(path)
    elif record.command == "sweep":
        path = out_dir / "sweep.csv"
        write_atomic(path, _csv_text(SWEEP_COLUMNS, record.result["rows"]))
        written.append(path)
    return written
