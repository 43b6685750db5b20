"""Seeded width sweeps comparing the two planners, with CSV reporting.

Each (algorithm, width, run) cell gets a seed derived deterministically
from the base seed, so tables are byte-identical across re-runs and
independent of execution order. The spiral sweep keeps the wall thickness
fixed while the arm width varies, so wider arms make the walk's job easier
while the tree faces relatively thinner walls.
"""

from __future__ import annotations

import concurrent.futures
import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import KinoConfig, KinoState, kino_hnr_plan, kino_rrt_plan
from .geometry import ProblemMap, corridor_map, spiral_map
from .planner import RESULT_FIELDS, PlanResult, hnr_plan, rrt_plan

SUMMARY_FIELDS = ["algorithm", "width", "runs", "success_rate", "mean_transitions",
                  "median_transitions", "std_transitions"]

ALGORITHMS = ("hnr", "rrt")


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep request.

    budgets: transition cap per run; runs over it are recorded as failures
    with transitions = budget (censored means, flagged in the summary).
    """

    experiment: str = "spiral"  # "spiral" (position only) or "corridor" (kinematic)
    widths: tuple = (0.8, 1.0, 1.2, 1.5, 2.0)
    runs_per_width: int = 500
    base_seed: int = 0
    budget: int = 100000
    kino: KinoConfig = field(default_factory=KinoConfig)
    loops: float = 2.5
    arm_length_scale: float = 10.0
    wall: float = 0.2
    legs: tuple = (10.0, 10.0, 10.0)
    jobs: int = 1

    def __post_init__(self):
        if self.experiment not in ("spiral", "corridor"):
            raise ValueError("experiment must be 'spiral' or 'corridor'")
        if len(self.widths) == 0 or min(self.widths) <= 0:
            raise ValueError("widths must be positive")
        if list(self.widths) != sorted(self.widths):
            raise ValueError("widths must be ascending")
        if self.runs_per_width < 1:
            raise ValueError("runs_per_width must be at least 1")


@dataclass
class RunRecord:
    algorithm: str
    map_name: str
    width: float
    seed: int
    success: bool
    transitions: int
    nodes: int
    path_length: float
    wall_time_ms: float
    draws: int = 0


def derive_seed(base_seed: int, run: int, width_idx: int, algo_idx: int) -> int:
    """Stable per-run seed; independent of execution schedule."""
    ss = np.random.SeedSequence([int(base_seed), int(run), int(width_idx), int(algo_idx)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _build_map(spec: ExperimentSpec, width: float) -> ProblemMap:
    if spec.experiment == "spiral":
        return spiral_map(width, loops=spec.loops,
                          arm_length_scale=spec.arm_length_scale, wall=spec.wall)
    return corridor_map(width, legs=spec.legs)


def _run_one(spec: ExperimentSpec, pm: ProblemMap, algo: str, width: float,
             seed: int) -> tuple[RunRecord, PlanResult]:
    t0 = time.perf_counter()
    try:
        if spec.experiment == "spiral":
            if algo == "hnr":
                res = hnr_plan(pm.space, pm.start, pm.goal, spec.budget, seed)
            else:
                res, _ = rrt_plan(pm.space, pm.start, pm.goal, spec.budget, seed)
            ndim = pm.space.dimension
        else:
            start = KinoState(position=pm.start, velocity=np.zeros(pm.space.dimension))
            if algo == "hnr":
                res = kino_hnr_plan(pm.space, start, pm.goal, spec.kino, spec.budget, seed)
            else:
                res = kino_rrt_plan(pm.space, start, pm.goal, spec.kino, spec.budget, seed)
            ndim = pm.space.dimension
        rec = RunRecord(algorithm=algo, map_name=pm.name, width=width, seed=seed,
                        success=res.success, transitions=res.transitions,
                        nodes=res.node_count, path_length=res.path_length(ndim),
                        wall_time_ms=res.wall_time * 1000.0, draws=res.draws)
        return rec, res
    except Exception:  # noqa: BLE001 - a crashed run becomes a failed row
        rec = RunRecord(algorithm=algo, map_name=pm.name, width=width, seed=seed,
                        success=False, transitions=spec.budget, nodes=0,
                        path_length=0.0, wall_time_ms=(time.perf_counter() - t0) * 1e3)
        return rec, PlanResult(path=np.empty((0, 2)), transitions=spec.budget,
                               success=False, wall_time=0.0, seed=seed)


def _cell(args):
    spec, width_idx, width, algo_idx, algo = args
    pm = _build_map(spec, width)
    records = []
    sample_trace = None
    for run in range(spec.runs_per_width):
        seed = derive_seed(spec.base_seed, run, width_idx, algo_idx)
        rec, res = _run_one(spec, pm, algo, width, seed)
        records.append(rec)
        if run == 0:
            sample_trace = res
    return width_idx, algo_idx, records, sample_trace


def run_sweep(spec: ExperimentSpec):
    """Execute the sweep; returns (records, summary rows, sample traces).

    Sample traces hold the first run's full path per (algorithm, width) for
    plotting next to the aggregate table.
    """
    cells = [(spec, wi, w, ai, a)
             for wi, w in enumerate(spec.widths) for ai, a in enumerate(ALGORITHMS)]
    results = []
    if spec.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=spec.jobs) as ex:
            results = list(ex.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]
    results.sort(key=lambda t: (t[1], t[0]))  # (algo, width) for stable output order
    records: list[RunRecord] = []
    traces: dict[tuple[str, float], PlanResult] = {}
    for width_idx, algo_idx, recs, trace in results:
        records.extend(recs)
        traces[(ALGORITHMS[algo_idx], spec.widths[width_idx])] = trace
    return records, summarize(records), traces


def summarize(records: list[RunRecord]) -> list[dict]:
    """Per (algorithm, width) aggregate rows; transitions are censored at budget."""
    rows = []
    keys = sorted({(r.algorithm, r.width) for r in records})
    for algo, width in keys:
        sel = [r for r in records if r.algorithm == algo and r.width == width]
        tr = np.array([r.transitions for r in sel], dtype=float)
        rows.append({
            "algorithm": algo,
            "width": width,
            "runs": len(sel),
            "success_rate": float(np.mean([r.success for r in sel])),
            "mean_transitions": float(tr.mean()),
            "median_transitions": float(np.median(tr)),
            "std_transitions": float(tr.std(ddof=1)) if len(tr) > 1 else 0.0,
        })
    return rows


def emit_report(records: list[RunRecord], summary: list[dict], out_dir,
                fmt: str = "csv", include_timing: bool = False) -> list[str]:
    """Write results.csv and summary.csv (or plot-ready series) under out_dir.

    Wall times are zeroed unless include_timing is set, keeping output files
    byte-identical across runs of the same seeded spec.
    """
    import os

    if not records:
        raise ValueError("empty record table")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    results_path = os.path.join(out_dir, "results.csv")
    with open(results_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(RESULT_FIELDS + ["draws"])
        for r in records:
            wall = f"{r.wall_time_ms:.3f}" if include_timing else "0.000"
            w.writerow([r.algorithm, r.map_name, f"{r.width:g}", r.seed,
                        int(r.success), r.transitions, r.nodes,
                        f"{r.path_length:.6f}", wall, r.draws])
    paths.append(results_path)
    summary_path = os.path.join(out_dir, "summary.csv")
    with open(summary_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SUMMARY_FIELDS)
        for row in summary:
            w.writerow([row["algorithm"], f"{row['width']:g}", row["runs"],
                        f"{row['success_rate']:.4f}",
                        f"{row['mean_transitions']:.2f}",
                        f"{row['median_transitions']:.1f}",
                        f"{row['std_transitions']:.2f}"])
    paths.append(summary_path)
    if fmt == "plotdata":
        plot_path = os.path.join(out_dir, "plotdata.csv")
        with open(plot_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["algorithm", "width", "mean", "stderr"])
            for row in summary:
                stderr = row["std_transitions"] / np.sqrt(row["runs"])
                w.writerow([row["algorithm"], f"{row['width']:g}",
                            f"{row['mean_transitions']:.2f}", f"{stderr:.2f}"])
        paths.append(plot_path)
    return paths
