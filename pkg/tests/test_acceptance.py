"""Acceptance suite: one test per criterion, tolerances pinned up front.

Each test prints one line `[criterion N] PASS|FAIL ...` with the measured
quantities before asserting. Criteria 9 and 10 compare the two planners'
mean transition counts on corridor-style maps; see the repository notes on
why those comparisons are expected to favor the tree planner.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from ncwalk.bench import ExperimentSpec, run_sweep
from ncwalk.dynamics import KinoConfig, KinoState, kino_hnr_plan, kino_rrt_plan
from ncwalk.geometry import Ball, Box, corridor_map, dumbbell_map, spiral_map
from ncwalk.metrics import (
    ConstantsProfile,
    check_chain_triangle,
    check_cross_ratio_bound,
    conductance_lower_bound,
    cross_ratio,
    empirical_conductance,
    mixing_time_bound,
)
from ncwalk.planner import uniform_point
from ncwalk.sampler import (
    ensure_rng,
    hnr_chain,
    hnr_step,
    occupancy_tv,
    proposal_density,
    step_quantile,
)

BOX = Box(lo=np.zeros(2), hi=np.ones(2))
DISK = Ball(center=np.zeros(2), radius=1.0)


def report(num, ok, detail):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


# ---------------------------------------------------------------------------


def test_c01_uniform_stationarity_box():
    t0 = time.perf_counter()
    tv = occupancy_tv(BOX, (0.01, 0.01), steps=100000, bins=20, burn_in=10000,
                      rng=101, reference="exact")
    elapsed = time.perf_counter() - t0
    ok = tv < 0.05 and elapsed < 10.0
    assert report(1, ok, f"TV={tv:.4f} (<0.05), runtime={elapsed:.1f}s (<10s)")


def test_c02_disk_center_step_law():
    rng = ensure_rng(102)
    k = 100000
    dists = np.empty(k)
    for i in range(k):
        dists[i] = hnr_step(DISK, (0.0, 0.0), rng).step_length
    ks = stats.kstest(dists, "uniform").statistic
    ok = ks < 0.01
    assert report(2, ok, f"KS statistic={ks:.5f} (<0.01) at {k} samples")


def _grid_masses(u, bins, n_theta):
    """One-step bin masses on the unit box by angular quadrature.

    For a uniform direction the landing point is uniform on the chord, so
    P(bin) = E_theta[len(chord ∩ bin)/len(chord)]; the chord and the bin
    overlaps come from exact slab clipping.
    """
    edges = np.linspace(0.0, 1.0, bins + 1)
    masses = np.zeros((bins, bins))
    for th in (np.arange(n_theta) + 0.5) * np.pi / n_theta:
        d = np.array([np.cos(th), np.sin(th)])
        lims = []
        for i in range(2):
            t1, t2 = (0.0 - u[i]) / d[i], (1.0 - u[i]) / d[i]
            lims.append((min(t1, t2), max(t1, t2)))
        lo = max(lims[0][0], lims[1][0])
        hi = min(lims[0][1], lims[1][1])
        tx = (edges - u[0]) / d[0]
        ty = (edges - u[1]) / d[1]
        ax0, ax1 = np.minimum(tx[:-1], tx[1:]), np.maximum(tx[:-1], tx[1:])
        ay0, ay1 = np.minimum(ty[:-1], ty[1:]), np.maximum(ty[:-1], ty[1:])
        seg_lo = np.maximum(np.maximum(ax0[:, None], ay0[None, :]), lo)
        seg_hi = np.minimum(np.minimum(ax1[:, None], ay1[None, :]), hi)
        masses += np.clip(seg_hi - seg_lo, 0.0, None) / (hi - lo)
    return masses / n_theta


def test_c03_proposal_density_match():
    u = np.array([0.325, 0.675])
    rng = ensure_rng(103)
    k = 100000
    pts = np.empty((k, 2))
    for i in range(k):
        pts[i] = hnr_step(BOX, u, rng).end
    h, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=20, range=[[0, 1], [0, 1]])
    q = _grid_masses(u, 20, 20001)
    tv = 0.5 * np.abs(h / k - q).sum()
    integral = float(np.mean(proposal_density(BOX, u, rng.random((4000000, 2)))))
    ok = tv < 0.05 and abs(integral - 1.0) < 0.01
    assert report(3, ok, f"grid TV={tv:.4f} (<0.05), MC integral={integral:.4f} (1±0.01)")


def test_c04_step_quantile_clearance_bound():
    rng = ensure_rng(104)
    worst = math.inf
    failures = 0
    for _ in range(50):
        h = 0.02 + 0.28 * rng.random()
        u_box = np.array([h, 0.15 + 0.7 * rng.random()])
        q = step_quantile(BOX, u_box, 10000, rng)
        worst = min(worst, q - h / 16.0)
        failures += q < h / 16.0
    for _ in range(50):
        h = 0.02 + 0.5 * rng.random()
        ang = 2 * np.pi * rng.random()
        u_disk = (1.0 - h) * np.array([np.cos(ang), np.sin(ang)])
        q = step_quantile(DISK, u_disk, 10000, rng)
        worst = min(worst, q - h / 16.0)
        failures += q < h / 16.0
    ok = failures == 0
    assert report(4, ok, f"h/16 bound on 100 points: {failures} violations, "
                         f"worst margin={worst:.4f}")


def test_c05_cross_ratio_chain_bound():
    t0 = time.perf_counter()
    rep = check_cross_ratio_bound(1.0, 0.1, trials=10000, rng=105)
    elapsed = time.perf_counter() - t0
    ok = rep.violations == 0 and rep.min_margin > 0 and elapsed < 5.0
    assert report(5, ok, f"{rep.trials} configs, {rep.violations} violations, "
                         f"min margin={rep.min_margin:.4f}, runtime={elapsed:.2f}s (<5s)")


def test_c06_chain_triangle_exact():
    rng = ensure_rng(106)
    violations = 0
    trials = 10000
    for _ in range(trials):
        m = int(rng.integers(2, 10))
        pts = np.sort(rng.random(m + 2)) * float(rng.uniform(0.5, 20.0))
        if np.min(np.diff(pts)) < 1e-9:
            continue
        violations += not check_chain_triangle(pts)
    ok = violations == 0
    assert report(6, ok, f"{trials} monotone tuples, {violations} violations")


def test_c07_cross_ratio_lower_bound_three_maps():
    spiral = spiral_map(1.2)
    total_violations = 0
    for space in (BOX, DISK, spiral.space):
        D = space.diameter()
        rng = ensure_rng(107)
        lo, hi = space.bounding_box()
        done = 0
        while done < 10000:
            u = lo + (hi - lo) * rng.random(2)
            v = lo + (hi - lo) * rng.random(2)
            if not (space.contains(u) and space.contains(v)):
                continue
            gap = float(np.linalg.norm(u - v))
            if gap < 1e-12 or not space.sees(u, v):
                continue
            val = cross_ratio(space, u, v).value
            total_violations += val < 4.0 * gap / D * (1.0 - 1e-9)
            done += 1
    ok = total_violations == 0
    assert report(7, ok, f"3 maps x 10000 visible pairs, {total_violations} violations")


def test_c08_conductance_slope_and_mixing_example():
    ns = np.unique(np.logspace(1, 4, 30).astype(int))
    phis = [conductance_lower_bound(
        ConstantsProfile(L_Sigma=1.0, L_Omega=1.0, kappa=1.0, r=1.0, n=int(n),
                         D_Sigma=1.5, D_Omega=2.0), r_eps_prime=1.0).phi
            for n in ns]
    slope = float(np.polyfit(np.log(ns), np.log(phis), 1)[0])
    t = mixing_time_bound(0.1, 100.0, 0.01)
    ok = abs(slope + 3.0) <= 0.1 and t == 1379
    assert report(8, ok, f"log-log slope={slope:.4f} (-3±0.1), "
                         f"mixing example t={t} (=1379)")


def test_c09_spiral_benchmark_comparative():
    """Mean transitions of the chain against the tree on the spiral sweep.

    Checked exactly as stated: chain mean below tree mean at every width and
    the gap largest at the widest arms.
    """
    t0 = time.perf_counter()
    spec = ExperimentSpec(experiment="spiral", widths=(1.0, 1.2, 1.5, 2.0),
                          runs_per_width=100, base_seed=109, budget=100000, jobs=2)
    _, summary, _ = run_sweep(spec)
    elapsed = time.perf_counter() - t0
    means = {(s["algorithm"], s["width"]): s["mean_transitions"] for s in summary}
    gaps = [means[("rrt", w)] - means[("hnr", w)] for w in spec.widths]
    lines = ", ".join(
        f"w={w}: hnr={means[('hnr', w)]:.0f} rrt={means[('rrt', w)]:.0f}"
        for w in spec.widths)
    hnr_wins = all(means[("hnr", w)] < means[("rrt", w)] for w in spec.widths)
    gap_at_widest = int(np.argmax(gaps)) == len(spec.widths) - 1
    ok = hnr_wins and gap_at_widest and elapsed < 300.0
    assert report(9, ok, f"{lines}; gap widest at w={spec.widths[int(np.argmax(gaps))]}; "
                         f"runtime={elapsed:.0f}s (<300s)")


def test_c10_kino_corridor_comparative_and_invariants():
    cfg = KinoConfig()
    budget = 10000
    widths = (1.5, 2.0, 3.0)
    means = {}
    invariant_violations = 0
    t0 = time.perf_counter()
    for width in widths:
        pm = corridor_map(width)
        start = KinoState(position=pm.start, velocity=np.zeros(2))
        for algo, plan in (("hnr", kino_hnr_plan), ("rrt", kino_rrt_plan)):
            tr = []
            for seed in range(100):
                res = plan(pm.space, start, pm.goal, cfg, budget, seed)
                tr.append(res.transitions if res.success else budget)
                pos_ok = pm.space.contains_many(res.path[:, :2]).all()
                speeds = np.linalg.norm(res.path[:, 2:], axis=1)
                stop_ok = np.all(speeds[res.stops] == 0.0)
                invariant_violations += (not pos_ok) + (not stop_ok)
            means[(algo, width)] = float(np.mean(tr))
    elapsed = time.perf_counter() - t0
    lines = ", ".join(
        f"w={w}: hnr={means[('hnr', w)]:.0f} rrt={means[('rrt', w)]:.0f}"
        for w in widths)
    hnr_wins = all(means[("hnr", w)] <= means[("rrt", w)] for w in widths)
    ok = hnr_wins and invariant_violations == 0
    assert report(10, ok, f"{lines}; trajectory invariant violations="
                          f"{invariant_violations}; runtime={elapsed:.0f}s")


def test_c11_dumbbell_conductance_ordering():
    pm = dumbbell_map(neck_width=0.05, neck_length=0.2)
    mid = 1.0 + 0.1
    phi_d, sd = empirical_conductance(pm.space, lambda P: P[:, 0] < mid,
                                      samples=100000, rng=111, with_stderr=True)
    phi_b, sb = empirical_conductance(BOX, lambda P: P[:, 0] < 0.5,
                                      samples=100000, rng=112, with_stderr=True)
    separated = phi_d + 3 * sd < 0.5 * phi_b - 3 * sb
    ok = phi_d < 0.5 * phi_b and separated
    assert report(11, ok, f"dumbbell={phi_d:.4f}±{sd:.4f}, box={phi_b:.4f}±{sb:.4f}, "
                          f"ratio={phi_d / phi_b:.3f} (<0.5 with 3-sigma separation)")


def test_c12_cli_determinism_all_subcommands(tmp_path):
    from ncwalk.cli import main

    cases = [
        ["sample", "--map", "box", "--steps", "500"],
        ["plan", "--algo", "hnr", "--map", "spiral", "--width", "1.2",
         "--max-transitions", "30000"],
        ["plan", "--algo", "rrt", "--map", "spiral", "--width", "1.2",
         "--max-transitions", "30000"],
        ["bench", "--experiment", "corridor", "--widths", "2.0", "--runs", "2",
         "--budget", "2000", "--jobs", "1"],
        ["check", "--suite", "lemmas", "--trials", "500"],
        ["map", "--gen", "spiral", "--width", "1.2"],
    ]
    all_same = True
    for i, args in enumerate(cases):
        outs = []
        for rep_dir in ("a", "b"):
            out = tmp_path / f"{i}{rep_dir}"
            main(["--seed", "7", "--out", str(out)] + args)
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        all_same &= outs[0] == outs[1]
    assert report(12, all_same, f"{len(cases)} subcommand invocations byte-identical "
                                f"under repeated seeds")
