import math

import numpy as np
import pytest

from ncwalk import geometry
from ncwalk.geometry import Ball, Box, PolygonMap, dumbbell_map, spiral_map
from ncwalk.metrics import (
    BandPartition,
    ConstantsProfile,
    ball_chord_ratio_exact,
    band_h_value,
    chain_distance,
    check_chain_triangle,
    check_cross_ratio_bound,
    check_isoperimetry,
    check_lipschitz_identity,
    chord_to_boundary_ratio,
    conductance_lower_bound,
    cross_ratio,
    empirical_conductance,
    mixing_time_bound,
    normalized_ball_radius,
    unit_ball_volume,
)
from ncwalk.sampler import ensure_rng

# Frozen regression value of the conductance bound, evaluated once by hand
# from the closed form (L_Sigma = L_Omega = 1, kappa = 1, n = 2, r = 1,
# D_Sigma = D_Omega = 2, ratio R = 1) before the module was written.
PHI_REGRESSION = 1.2576351165665255e-08


# ---------------------------------------------------------------------------
# cross_ratio


def test_cross_ratio_segment_example():
    # thin box around the segment [0, 4]: chord endpoints (0, 4), points 1 and 3
    space = Box(lo=(0.0, -0.05), hi=(4.0, 0.05))
    s = cross_ratio(space, (1.0, 0.0), (3.0, 0.0))
    assert s.value == pytest.approx(8.0, rel=1e-12)
    assert np.allclose(s.a, (0.0, 0.0))
    assert np.allclose(s.b, (4.0, 0.0))


def test_cross_ratio_disk_symmetric_pair(unit_disk):
    s = cross_ratio(unit_disk, (-0.5, 0.0), (0.5, 0.0))
    assert s.value == pytest.approx(8.0, rel=1e-12)


def test_cross_ratio_same_point_zero(unit_disk):
    assert cross_ratio(unit_disk, (0.1, 0.2), (0.1, 0.2)).value == 0.0


def test_cross_ratio_invisible_raises(corridor_bundle):
    with pytest.raises(ValueError):
        cross_ratio(corridor_bundle.space, corridor_bundle.start,
                    corridor_bundle.goal.center)


def test_cross_ratio_symmetry(unit_disk, spiral_bundle):
    rng = ensure_rng(0)
    for space in (unit_disk, spiral_bundle.space):
        lo, hi = space.bounding_box()
        done = 0
        while done < 50:
            u = lo + (hi - lo) * rng.random(2)
            v = lo + (hi - lo) * rng.random(2)
            if not (space.contains(u) and space.contains(v) and space.sees(u, v)):
                continue
            if np.linalg.norm(u - v) < 1e-9:
                continue
            a = cross_ratio(space, u, v).value
            b = cross_ratio(space, v, u).value
            assert a == pytest.approx(b, rel=1e-9)
            done += 1


@pytest.mark.parametrize("space_fn", [
    lambda: Box(lo=np.zeros(2), hi=np.ones(2)),
    lambda: Ball(center=np.zeros(2), radius=1.0),
    lambda: spiral_map(1.2).space,
])
def test_cross_ratio_lower_bound_fuzz(space_fn):
    space = space_fn()
    D = space.diameter()
    rng = ensure_rng(1)
    lo, hi = space.bounding_box()
    done = 0
    while done < 2000:
        u = lo + (hi - lo) * rng.random(2)
        v = lo + (hi - lo) * rng.random(2)
        if not (space.contains(u) and space.contains(v) and space.sees(u, v)):
            continue
        gap = np.linalg.norm(u - v)
        if gap < 1e-9:
            continue
        val = cross_ratio(space, u, v).value
        assert val >= 4.0 * gap / D * (1.0 - 1e-9)
        done += 1


# ---------------------------------------------------------------------------
# chain_distance


def test_chain_distance_visible_pair_not_worse_than_direct(unit_disk):
    u, v = np.array([-0.4, 0.0]), np.array([0.4, 0.1])
    direct = cross_ratio(unit_disk, u, v).value
    val, witness = chain_distance(unit_disk, u, v, waypoints=64, rng=2)
    assert val <= direct + 1e-9
    assert np.allclose(witness[0], u) and np.allclose(witness[-1], v)


def test_chain_distance_same_point(unit_disk):
    val, _ = chain_distance(unit_disk, (0.2, 0.2), (0.2, 0.2), waypoints=8, rng=3)
    assert val == 0.0


def test_chain_distance_around_corner_two_resolutions():
    space = PolygonMap([(0, 0), (6, 0), (6, 6), (4, 6), (4, 2), (0, 2)], name="L")
    u, v = np.array([1.0, 1.0]), np.array([5.0, 5.0])
    assert not space.sees(u, v)
    d1, w1 = chain_distance(space, u, v, waypoints=512, rng=4)
    d2, w2 = chain_distance(space, u, v, waypoints=1024, rng=5)
    assert len(w1) >= 3  # at least one intermediate waypoint
    assert math.isfinite(d1) and math.isfinite(d2)
    assert abs(d1 - d2) / min(d1, d2) < 0.10
    # witness chain is a valid visible chain
    assert space.sees_many(w2[:-1], w2[1:]).all()


# ---------------------------------------------------------------------------
# chord-to-boundary ratio


def test_ratio_estimate_below_cap_and_exact():
    est = chord_to_boundary_ratio(1.0, 0.1, samples=200000, rng=6)
    exact = ball_chord_ratio_exact(1.0, 0.1)
    assert est.value <= est.cap
    assert est.value <= exact * (1.0 + 1e-9)
    assert est.value > 0.9 * exact  # the maximizer is reachable by sampling
    assert est.cap == pytest.approx(10.0)


def test_ratio_near_one_when_depth_fills_ball():
    est = chord_to_boundary_ratio(1.0, 0.999, samples=20000, rng=7)
    assert est.value == pytest.approx(1.0, abs=0.05)


def test_ratio_stable_across_sample_sizes():
    a = chord_to_boundary_ratio(1.0, 0.1, samples=100000, rng=8).value
    b = chord_to_boundary_ratio(1.0, 0.1, samples=1000000, rng=9).value
    assert abs(a - b) / b < 0.05


def test_ratio_rejects_bad_depth():
    with pytest.raises(ValueError):
        chord_to_boundary_ratio(1.0, 1.5)


# ---------------------------------------------------------------------------
# chained cross-ratio bound checker


def test_cross_ratio_bound_no_violations():
    rep = check_cross_ratio_bound(1.0, 0.1, trials=10000, rng=10)
    assert rep.violations == 0
    assert rep.min_margin > 0
    assert rep.trials > 9000


def test_cross_ratio_bound_skip_when_hypothesis_fails():
    rep = check_cross_ratio_bound(1.0, 0.1, trials=100, rng=11, r_eps=0.05)
    assert rep.skipped is not None
    assert rep.trials == 0


def test_cross_ratio_bound_report_json():
    rep = check_cross_ratio_bound(1.0, 0.2, trials=500, rng=12)
    doc = rep.to_dict()
    assert doc["checker"] == "cross_ratio_bound"
    assert set(doc) >= {"checker", "trials", "violations", "min_margin", "config"}


# ---------------------------------------------------------------------------
# chain triangle inequality


def test_chain_triangle_worked_example():
    # a=0, b=4, y=(1,2,3): 2 + 2 <= 8
    assert check_chain_triangle([0.0, 1.0, 2.0, 3.0, 4.0])


def test_chain_triangle_single_pair_equality():
    assert check_chain_triangle([0.0, 1.0, 3.0, 4.0])


def test_chain_triangle_fuzz():
    rng = ensure_rng(13)
    for _ in range(10000):
        m = int(rng.integers(2, 8))
        pts = np.sort(rng.random(m + 2))
        if np.min(np.diff(pts)) < 1e-9:
            continue
        assert check_chain_triangle(pts)


def test_chain_triangle_rejects_unsorted():
    with pytest.raises(ValueError):
        check_chain_triangle([0.0, 2.0, 1.0, 4.0])


# ---------------------------------------------------------------------------
# conductance lower bound


def _profile(**kw):
    base = dict(L_Sigma=1.0, L_Omega=1.0, kappa=1.0, r=1.0, n=2,
                D_Sigma=2.0, D_Omega=2.0)
    base.update(kw)
    return ConstantsProfile(**base)


def test_conductance_frozen_regression():
    bb = conductance_lower_bound(_profile(), r_eps_prime=1.0)
    assert bb.phi == pytest.approx(PHI_REGRESSION, rel=1e-12)
    assert bb.delta == pytest.approx(9.0 / (320.0 * math.e**4 * 2.0 * 2.0), rel=1e-12)
    assert bb.eps_prime == pytest.approx(0.225)
    assert bb.N == pytest.approx(9.0 / 480.0)


def test_conductance_cubic_decay_in_dimension():
    ns = np.unique(np.logspace(1, 4, 25).astype(int))
    phis = [conductance_lower_bound(_profile(n=int(n), D_Sigma=1.5), r_eps_prime=1.0).phi
            for n in ns]
    slope = np.polyfit(np.log(ns), np.log(phis), 1)[0]
    assert slope == pytest.approx(-3.0, abs=0.1)


def test_conductance_monotone_in_constants():
    base = conductance_lower_bound(_profile()).phi
    assert conductance_lower_bound(_profile(kappa=10.0)).phi <= base
    assert conductance_lower_bound(_profile(L_Sigma=2.0)).phi <= base
    assert conductance_lower_bound(_profile(L_Omega=2.0)).phi <= base
    assert conductance_lower_bound(_profile(D_Sigma=4.0)).phi <= base
    assert conductance_lower_bound(_profile(D_Omega=4.0)).phi <= base
    assert conductance_lower_bound(_profile(n=4)).phi <= base


def test_conductance_g_vanishes_with_curvature():
    a = conductance_lower_bound(_profile(kappa=1e3))
    b = conductance_lower_bound(_profile(kappa=1e6))
    assert b.G < a.G < 1e-3


def test_conductance_rejects_bad_profile():
    with pytest.raises(ValueError):
        _profile(L_Sigma=0.5)
    with pytest.raises(ValueError):
        _profile(kappa=-1.0)


def test_normalized_ball_radius():
    for n in (2, 3, 8):
        r = normalized_ball_radius(n)
        assert r**n * unit_ball_volume(n) == pytest.approx(1.0, rel=1e-12)


# ---------------------------------------------------------------------------
# mixing time


def test_mixing_time_worked_example():
    assert mixing_time_bound(0.1, 100.0, 0.01) == 1379


def test_mixing_time_already_mixed():
    # eps at or above sqrt(M) needs no steps at all
    assert mixing_time_bound(0.5, 1.0, 1.0) == 0
    assert mixing_time_bound(0.5, 4.0, 2.5) == 0


def test_mixing_time_quadratic_in_phi():
    t1 = mixing_time_bound(0.02, 100.0, 0.01)
    t2 = mixing_time_bound(0.01, 100.0, 0.01)
    assert t2 / t1 == pytest.approx(4.0, rel=0.01)


def test_mixing_time_monotonicity():
    assert mixing_time_bound(0.2, 100.0, 0.01) <= mixing_time_bound(0.1, 100.0, 0.01)
    assert mixing_time_bound(0.1, 100.0, 0.05) <= mixing_time_bound(0.1, 100.0, 0.01)
    assert mixing_time_bound(0.1, 10.0, 0.01) <= mixing_time_bound(0.1, 100.0, 0.01)


def test_mixing_time_rejects_bad_inputs():
    with pytest.raises(ValueError):
        mixing_time_bound(0.0, 100.0, 0.01)
    with pytest.raises(ValueError):
        mixing_time_bound(0.1, 0.5, 0.01)


# ---------------------------------------------------------------------------
# empirical conductance


def test_empirical_conductance_box_split_symmetric(unit_box):
    left = lambda P: P[:, 0] < 0.5
    right = lambda P: P[:, 0] >= 0.5
    a = empirical_conductance(unit_box, left, samples=30000, rng=14)
    b = empirical_conductance(unit_box, right, samples=30000, rng=15)
    assert a > 0 and b > 0
    assert a == pytest.approx(b, rel=0.1)


def test_empirical_conductance_dumbbell_below_box(unit_box):
    pm = dumbbell_map(neck_width=0.05, neck_length=0.2)
    mid = 1.0 + 0.1
    phi_d, sd = empirical_conductance(pm.space, lambda P: P[:, 0] < mid,
                                      samples=30000, rng=16, with_stderr=True)
    phi_b, sb = empirical_conductance(unit_box, lambda P: P[:, 0] < 0.5,
                                      samples=30000, rng=17, with_stderr=True)
    assert phi_d + 3 * sd < phi_b - 3 * sb
    assert phi_d < 0.5 * phi_b


def test_empirical_conductance_needs_two_sides(unit_box):
    with pytest.raises(ValueError):
        empirical_conductance(unit_box, lambda P: np.ones(len(P), bool),
                              samples=1000, rng=18)


# ---------------------------------------------------------------------------
# isoperimetric inequality


@pytest.mark.parametrize("t", [0.05, 0.1, 0.2])
def test_isoperimetry_strip_partitions(unit_disk, t):
    band = BandPartition(normal=(0.0, 1.0), offset=0.0, width=t)
    res = check_isoperimetry(unit_disk, band, samples=150000, rng=19)
    assert res.holds
    # analytic disk areas agree with the Monte-Carlo ones
    y = t / 2.0
    halfband = y * math.sqrt(1 - y * y) + math.asin(y)
    assert res.vol3 == pytest.approx(2 * halfband, abs=4 * res.stderr + 0.01)
    assert res.h_value == pytest.approx((1 / 3) * min(1.0, 8 * t / (2 - t) ** 2))


def test_isoperimetry_empty_band(unit_disk):
    band = BandPartition(normal=(1.0, 0.0), offset=0.0, width=0.0)
    res = check_isoperimetry(unit_disk, band, samples=20000, rng=20)
    assert res.holds
    assert res.h_value == 0.0


def test_isoperimetry_random_bands(unit_disk):
    rng = ensure_rng(21)
    for k in range(50):
        d = rng.standard_normal(2)
        band = BandPartition(normal=d, offset=float(rng.uniform(-0.4, 0.4)),
                             width=float(rng.uniform(0.02, 0.3)))
        res = check_isoperimetry(unit_disk, band, samples=20000, rng=rng)
        assert res.holds, f"violation at instance {k}: margin {res.margin}"


def test_isoperimetry_rejects_oversized_h(unit_disk):
    band = BandPartition(normal=(0.0, 1.0), offset=0.0, width=0.1)
    with pytest.raises(ValueError):
        check_isoperimetry(unit_disk, band, samples=20000, rng=22, h_value=0.5)


def test_band_h_value_zero_width():
    assert band_h_value(1.0, 0.0) == 0.0


# ---------------------------------------------------------------------------
# identity-map Lipschitz check


def test_lipschitz_identity_no_violations(unit_disk):
    rep = check_lipschitz_identity(unit_disk, 0.1, pairs=2000, rng=23)
    assert rep.violations == 0
    assert rep.config["factor"] >= 1.0
    assert rep.min_margin >= 0.0


def test_lipschitz_identity_requires_ball(unit_box):
    with pytest.raises(ValueError):
        check_lipschitz_identity(unit_box, 0.1, pairs=10, rng=24)
