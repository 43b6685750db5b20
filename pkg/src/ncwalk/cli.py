"""Command-line front end: sample, plan, bench, check and map subcommands.

Every subcommand is deterministic under --seed (falling back to the
NCW_SEED environment variable). Outputs land under --out with fixed
filenames; wall-clock columns are zeroed unless --timing is given so that
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bench, dynamics, geometry, metrics, planner, sampler

MAP_KINDS = ("box", "disk", "spiral", "corridor", "dumbbell")


def _load_problem(args) -> geometry.ProblemMap:
    name = args.map
    if name.endswith(".json") or os.path.exists(name):
        return geometry.load_map(name)
    if name == "box":
        return geometry.box_map()
    if name == "disk":
        return geometry.ball_map(radius=1.0)
    if name == "spiral":
        return geometry.spiral_map(args.width, loops=args.loops,
                                   arm_length_scale=args.scale, wall=args.wall)
    if name == "corridor":
        return geometry.corridor_map(args.width, legs=tuple(args.legs))
    if name == "dumbbell":
        return geometry.dumbbell_map(neck_width=args.neck)
    raise ValueError(f"unknown map {name!r}; use one of {MAP_KINDS} or a map JSON path")


def _add_map_flags(p):
    p.add_argument("--map", default="box",
                   help="built-in map name or path to a map JSON file")
    p.add_argument("--width", type=float, default=1.2, help="corridor/arm width")
    p.add_argument("--loops", type=float, default=2.5, help="spiral loop count")
    p.add_argument("--scale", type=float, default=10.0, help="spiral arm length scale")
    p.add_argument("--wall", type=float, default=0.2, help="spiral wall thickness")
    p.add_argument("--legs", type=float, nargs=3, default=[10.0, 10.0, 10.0],
                   help="corridor leg lengths")
    p.add_argument("--neck", type=float, default=0.05, help="dumbbell neck width")


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="ncwalk",
        description="Hit-and-Run sampling and RRT planning on non-convex free spaces",
    )
    ap.add_argument("--seed", type=int, default=None,
                    help="RNG seed (default: NCW_SEED env var, else 0)")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--format", choices=("csv", "plotdata"), default="csv")
    ap.add_argument("--config", default=None,
                    help="JSON file with flag defaults (flags > config > defaults)")
    ap.add_argument("--timing", action="store_true",
                    help="write measured wall times (breaks byte-identical output)")
    sub = ap.add_subparsers(dest="command", required=True)
    subparsers = {}

    p = subparsers["sample"] = sub.add_parser(
        "sample", help="run a Hit-and-Run chain, write trace.csv")
    _add_map_flags(p)
    p.add_argument("--steps", type=int, default=10000)

    p = subparsers["plan"] = sub.add_parser(
        "plan", help="plan start->goal, write results.csv and trace.csv")
    _add_map_flags(p)
    p.add_argument("--algo", choices=("hnr", "rrt"), default="hnr")
    p.add_argument("--kino", action="store_true", help="kinematic (double integrator)")
    p.add_argument("--max-transitions", type=int, default=100000)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--v-max", type=float, default=2.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--k-max", type=int, default=50)

    p = subparsers["bench"] = sub.add_parser(
        "bench", help="seeded width sweep, write results/summary CSV")
    p.add_argument("--experiment", choices=("spiral", "corridor"), default="spiral")
    p.add_argument("--widths", default="0.8,1.0,1.2,1.5,2.0",
                   help="comma-separated ascending widths")
    p.add_argument("--runs", type=int, default=None,
                   help="runs per width per algorithm (default 500 spiral, 100 corridor)")
    p.add_argument("--budget", type=int, default=None,
                   help="transition cap per run (default 1e5 spiral, 1e4 corridor)")
    p.add_argument("--loops", type=float, default=2.5)
    p.add_argument("--scale", type=float, default=10.0)
    p.add_argument("--wall", type=float, default=0.2)
    p.add_argument("--legs", type=float, nargs=3, default=[10.0, 10.0, 10.0])
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    p = subparsers["check"] = sub.add_parser(
        "check", help="run a checker suite, write report.json")
    p.add_argument("--suite", choices=("lemmas", "density", "uniformity"),
                   default="lemmas")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--samples", type=int, default=100000)

    p = subparsers["map"] = sub.add_parser(
        "map", help="generate a map, write map.json")
    p.add_argument("--gen", choices=("spiral", "corridor", "dumbbell"), default="spiral")
    p.add_argument("--width", type=float, default=1.2)
    p.add_argument("--loops", type=float, default=2.5)
    p.add_argument("--scale", type=float, default=10.0)
    p.add_argument("--wall", type=float, default=0.2)
    p.add_argument("--legs", type=float, nargs=3, default=[10.0, 10.0, 10.0])
    p.add_argument("--neck", type=float, default=0.05)
    return ap, subparsers


def _cmd_sample(args, seed, out):
    pm = _load_problem(args)
    trace = sampler.hnr_chain(pm.space, pm.start, args.steps, seed)
    path = os.path.join(out, "trace.csv")
    sampler.write_trace_csv(trace, path)
    print(f"wrote {path} ({args.steps} steps on {pm.space.describe()})")
    return 0


def _cmd_plan(args, seed, out):
    pm = _load_problem(args)
    ndim = pm.space.dimension
    if args.kino:
        cfg = dynamics.KinoConfig(dt=args.dt, v_max=args.v_max, lam=args.lam,
                                  k_max=args.k_max)
        start = dynamics.KinoState(position=pm.start, velocity=np.zeros(ndim))
        if args.algo == "hnr":
            res = dynamics.kino_hnr_plan(pm.space, start, pm.goal, cfg,
                                         args.max_transitions, seed)
        else:
            res = dynamics.kino_rrt_plan(pm.space, start, pm.goal, cfg,
                                         args.max_transitions, seed)
        dynamics.write_kino_trace_csv(res, os.path.join(out, "trace.csv"))
    else:
        if args.algo == "hnr":
            res = planner.hnr_plan(pm.space, pm.start, pm.goal, args.max_transitions, seed)
        else:
            res, _ = planner.rrt_plan(pm.space, pm.start, pm.goal, args.max_transitions, seed)
        trace = sampler.ChainTrace(states=res.path, steps=len(res.path) - 1,
                                   seed=seed, space_id=pm.space.describe())
        sampler.write_trace_csv(trace, os.path.join(out, "trace.csv"))
    row = planner.result_row(args.algo + ("-kino" if args.kino else ""), pm.name,
                             getattr(args, "width", float("nan")), res, ndim,
                             include_timing=args.timing)
    planner.write_results_csv([row], os.path.join(out, "results.csv"))
    status = "success" if res.success else "budget exhausted"
    print(f"{status}: {res.transitions} transitions, wrote results.csv and trace.csv")
    return 0 if res.success else 1


def _cmd_bench(args, seed, out):
    widths = tuple(float(w) for w in args.widths.split(","))
    runs = args.runs if args.runs is not None else (500 if args.experiment == "spiral" else 100)
    budget = args.budget if args.budget is not None else (
        100000 if args.experiment == "spiral" else 10000)
    spec = bench.ExperimentSpec(experiment=args.experiment, widths=widths,
                                runs_per_width=runs, base_seed=seed, budget=budget,
                                loops=args.loops, arm_length_scale=args.scale,
                                wall=args.wall, legs=tuple(args.legs), jobs=args.jobs)
    records, summary, traces = bench.run_sweep(spec)
    paths = bench.emit_report(records, summary, out, fmt=args.format,
                              include_timing=args.timing)
    for (algo, width), res in traces.items():
        if res is None:
            continue
        tpath = os.path.join(out, f"trace_{algo}_w{width:g}.csv")
        if args.experiment == "corridor":
            dynamics.write_kino_trace_csv(res, tpath)
        else:
            tr = sampler.ChainTrace(states=res.path, steps=len(res.path) - 1)
            sampler.write_trace_csv(tr, tpath)
        paths.append(tpath)
    for row in summary:
        print(f"{row['algorithm']:4s} width={row['width']:<5g} "
              f"mean={row['mean_transitions']:<10.1f} success={row['success_rate']:.2f}")
    print("wrote " + ", ".join(paths))
    return 0


def _cmd_check(args, seed, out):
    reports = []
    if args.suite == "lemmas":
        reports.append(metrics.check_cross_ratio_bound(1.0, 0.1, args.trials, seed))
        rng = sampler.ensure_rng(seed + 1)
        violations = 0
        for _ in range(args.trials):
            pts = np.sort(rng.random(6))
            pts = pts * 4.0
            if len(np.unique(pts)) < 6:
                continue
            if not metrics.check_chain_triangle(pts):
                violations += 1
        reports.append(metrics.CheckReport("chain_triangle", args.trials, violations,
                                           0.0, {"points": 4}))
        reports.append(metrics.check_lipschitz_identity(
            geometry.Ball(center=np.zeros(2), radius=1.0), 0.1, args.trials, seed + 2))
    elif args.suite == "density":
        pm = geometry.box_map()
        rng = sampler.ensure_rng(seed)
        u = np.array([0.325, 0.675])
        pts = rng.random((args.samples, 2))
        dens = sampler.proposal_density(pm.space, u, pts)
        integral = float(np.mean(dens))  # box volume is 1
        reports.append(metrics.CheckReport(
            "density_integral", args.samples, int(abs(integral - 1.0) > 0.02),
            float(1.0 - abs(integral - 1.0)), {"integral": integral, "point": u.tolist()}))
    else:  # uniformity
        pm = geometry.box_map()
        tv = sampler.occupancy_tv(pm.space, np.array([0.01, 0.01]),
                                  steps=args.samples, bins=20, rng=seed)
        reports.append(metrics.CheckReport("uniformity_tv", args.samples,
                                           int(tv >= 0.05), float(0.05 - tv),
                                           {"tv": tv, "bins": 20}))
    path = os.path.join(out, "report.json")
    with open(path, "w") as f:
        json.dump([r.to_dict() for r in reports], f, indent=2, sort_keys=True)
        f.write("\n")
    bad = sum(r.violations for r in reports)
    print(f"wrote {path}: {len(reports)} checkers, {bad} violations")
    return 0 if bad == 0 else 1


def _cmd_map(args, seed, out):
    if args.gen == "spiral":
        pm = geometry.spiral_map(args.width, loops=args.loops,
                                 arm_length_scale=args.scale, wall=args.wall)
    elif args.gen == "corridor":
        pm = geometry.corridor_map(args.width, legs=tuple(args.legs))
    else:
        pm = geometry.dumbbell_map(neck_width=args.neck)
    path = os.path.join(out, "map.json")
    geometry.save_map(pm, path)
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    ap, subparsers = _build_parser()
    # --config supplies defaults; explicit flags still win
    pre, _ = ap.parse_known_args(argv)
    if pre.config:
        try:
            with open(pre.config) as f:
                cfg = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            print(f"error: cannot read config: {e}", file=sys.stderr)
            return 2
        known_root = {a.dest for a in ap._actions}
        ap.set_defaults(**{k: v for k, v in cfg.items() if k in known_root})
        for sp in subparsers.values():
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in cfg.items() if k in known})
    args = ap.parse_args(argv)
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("NCW_SEED", "0"))
    out = args.out
    os.makedirs(out, exist_ok=True)
    handlers = {"sample": _cmd_sample, "plan": _cmd_plan, "bench": _cmd_bench,
                "check": _cmd_check, "map": _cmd_map}
    try:
        return handlers[args.command](args, seed, out)
    except (ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
