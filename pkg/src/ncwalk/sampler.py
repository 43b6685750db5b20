"""The Hit-and-Run Markov kernel and its empirical diagnostics.

One step from u: draw an isotropic random direction, query the oracle for
the maximal visible chord through u along it, and land uniformly on that
chord. The closed-form transition density, the one-step displacement
quantile, grid total-variation estimates and view-overlap estimates live
here as well.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Chord, FreeSpace


def ensure_rng(rng) -> np.random.Generator:
    """Accept a seed or a Generator; None means fresh OS entropy."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def random_direction(n: int, rng) -> np.ndarray:
    """Uniform direction on the unit sphere in R^n (normalized Gaussian)."""
    if n < 2:
        raise ValueError("direction sampling needs dimension >= 2")
    rng = ensure_rng(rng)
    while True:
        v = rng.standard_normal(n)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


@dataclass(frozen=True)
class ProposalSample:
    """One accepted Hit-and-Run transition with its chord."""

    start: np.ndarray
    end: np.ndarray
    chord: Chord

    @property
    def step_length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))


@dataclass
class ChainTrace:
    """Accepted states of one chain; states[0] is the start point."""

    states: np.ndarray
    steps: int
    seed: int | None = None
    space_id: str = ""


def hnr_step(space: FreeSpace, u, rng) -> ProposalSample:
    """One Hit-and-Run transition from u.

    Draw order (fixed for reproducibility): one n-vector of normals for the
    direction, then one uniform for the position on the chord.
    """
    rng = ensure_rng(rng)
    u = np.asarray(u, dtype=float)
    if not space.contains(u):
        raise ValueError("chain state lies outside the free space")
    d = random_direction(space.dimension, rng)
    lo, hi = space.chord_span(u, d)
    t = lo + (hi - lo) * rng.random()
    v = u + t * d
    return ProposalSample(start=u, end=v, chord=Chord(a=u + lo * d, b=u + hi * d, direction=d))


def hnr_chain(space: FreeSpace, u0, steps: int, rng) -> ChainTrace:
    """Run `steps` Hit-and-Run transitions from u0; deterministic under seed."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = ensure_rng(rng)
    u = np.asarray(u0, dtype=float)
    if not space.contains(u):
        raise ValueError("chain start lies outside the free space")
    n = space.dimension
    states = np.empty((steps + 1, n))
    states[0] = u
    for k in range(1, steps + 1):
        d = random_direction(n, rng)
        lo, hi = space.chord_span(u, d)
        u = u + (lo + (hi - lo) * rng.random()) * d
        states[k] = u
    return ChainTrace(states=states, steps=steps, seed=seed, space_id=space.describe())


def unit_ball_volume(n: int) -> float:
    """Volume of the unit n-ball."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def proposal_density(space: FreeSpace, u, v):
    """Transition density of one Hit-and-Run step from u, evaluated at v.

    density(v) = 2 / (n * vol(B_n) * |chord through u and v| * |u-v|^(n-1))
    for v visible from u, zero otherwise, +inf at v = u (the density is
    singular there). Accepts a single point or an (k, n) array of points.
    """
    u = np.asarray(u, dtype=float)
    if not space.contains(u):
        raise ValueError("density base point lies outside the free space")
    V = np.asarray(v, dtype=float)
    single = V.ndim == 1
    V = np.atleast_2d(V)
    n = space.dimension
    const = 2.0 / (n * unit_ball_volume(n))
    from .geometry import Ball, Box

    if isinstance(space, (Box, Ball)):
        out = _density_convex(space, u, V, const, n)
    else:
        out = np.zeros(V.shape[0])
        for i, vi in enumerate(V):
            diff = vi - u
            r = float(np.linalg.norm(diff))
            if r < 1e-15:
                out[i] = np.inf
                continue
            if not space.sees(u, vi):
                continue
            lo, hi = space.chord_span(u, diff / r)
            out[i] = const / ((hi - lo) * r ** (n - 1))
    return float(out[0]) if single else out


def _density_convex(space, u, V, const, n):
    """Vectorized density on boxes and balls (every member point is visible)."""
    from .geometry import Box

    diff = V - u
    r = np.linalg.norm(diff, axis=1)
    inside = space.contains_many(V)
    out = np.zeros(V.shape[0])
    out[inside & (r < 1e-15)] = np.inf
    sel = inside & (r >= 1e-15)
    if not np.any(sel):
        return out
    d = diff[sel] / r[sel, None]
    if isinstance(space, Box):
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (space.lo - u) / d
            t2 = (space.hi - u) / d
        t1 = np.where(np.isfinite(t1), t1, np.where(d == 0, -np.inf, t1))
        lo = np.where(np.abs(d) > 1e-300, np.minimum(t1, t2), -np.inf).max(axis=1)
        hi = np.where(np.abs(d) > 1e-300, np.maximum(t1, t2), np.inf).min(axis=1)
        length = hi - lo
    else:
        w = u - space.center
        b = d @ w
        length = 2.0 * np.sqrt(np.maximum(b * b - (w @ w) + space.radius**2, 0.0))
    out[sel] = const / (length * r[sel] ** (n - 1))
    return out


def step_quantile(space: FreeSpace, u, samples: int, rng, q: float = 0.125) -> float:
    """Empirical q-quantile (default 1/8) of one-step displacement from u."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples for a stable quantile")
    rng = ensure_rng(rng)
    u = np.asarray(u, dtype=float)
    if not space.contains(u):
        raise ValueError("quantile base point lies outside the free space")
    n = space.dimension
    dists = np.empty(samples)
    for i in range(samples):
        d = random_direction(n, rng)
        lo, hi = space.chord_span(u, d)
        dists[i] = abs(lo + (hi - lo) * rng.random())
    return float(np.quantile(dists, q))


def _one_step_batch(space: FreeSpace, u, samples: int, rng) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    n = space.dimension
    out = np.empty((samples, n))
    for i in range(samples):
        d = random_direction(n, rng)
        lo, hi = space.chord_span(u, d)
        out[i] = u + (lo + (hi - lo) * rng.random()) * d
    return out


def proposal_tv(space: FreeSpace, u, v, grid_resolution: int = 20,
                samples: int = 20000, rng=None) -> float:
    """Estimated total-variation distance between the one-step kernels at u and v.

    Both kernels are sampled and histogrammed on one shared uniform grid over
    the bounding box; TV is half the L1 gap of the bin masses. Only 2D.
    """
    rng = ensure_rng(rng)
    if space.dimension != 2:
        raise ValueError("grid TV estimation is implemented for 2D spaces")
    lo, hi = space.bounding_box()
    su = _one_step_batch(space, u, samples, rng)
    sv = _one_step_batch(space, v, samples, rng)
    rng_box = [[lo[0], hi[0]], [lo[1], hi[1]]]
    hu, _, _ = np.histogram2d(su[:, 0], su[:, 1], bins=grid_resolution, range=rng_box)
    hv, _, _ = np.histogram2d(sv[:, 0], sv[:, 1], bins=grid_resolution, range=rng_box)
    return float(0.5 * np.abs(hu / samples - hv / samples).sum())


def invisible_mass(space: FreeSpace, u, v, samples: int = 10000, rng=None) -> float:
    """Fraction of one-step proposals from u that are invisible from v."""
    rng = ensure_rng(rng)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    pts = _one_step_batch(space, u, samples, rng)
    n_invis = 0
    for p in pts:
        if not space.sees(v, p):
            n_invis += 1
    return n_invis / samples


def occupancy_tv(space: FreeSpace, u0, steps: int, bins: int = 20,
                 burn_in: int | None = None, rng=None,
                 reference: str = "auto", reference_samples: int = 200000) -> float:
    """TV distance between chain occupancy and the uniform law on the space.

    The chain discards `burn_in` states (default 10% of steps). The uniform
    reference is exact per-bin box volume for Box spaces; otherwise it is a
    rejection-sampling histogram with `reference_samples` points. Only 2D.
    """
    if space.dimension != 2:
        raise ValueError("occupancy TV is implemented for 2D spaces")
    rng = ensure_rng(rng)
    if burn_in is None:
        burn_in = steps // 10
    trace = hnr_chain(space, u0, steps + burn_in, rng)
    pts = trace.states[burn_in + 1:]
    lo, hi = space.bounding_box()
    rng_box = [[lo[0], hi[0]], [lo[1], hi[1]]]
    h, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=bins, range=rng_box)
    p = h.ravel() / h.sum()
    from .geometry import Box

    if reference == "exact" or (reference == "auto" and isinstance(space, Box)):
        q = np.full(bins * bins, 1.0 / (bins * bins))
    else:
        ref = np.empty((reference_samples, 2))
        count = 0
        while count < reference_samples:
            cand = lo + (hi - lo) * rng.random((reference_samples, 2))
            good = cand[space.contains_many(cand)]
            take = min(len(good), reference_samples - count)
            ref[count:count + take] = good[:take]
            count += take
        hq, _, _ = np.histogram2d(ref[:, 0], ref[:, 1], bins=bins, range=rng_box)
        q = hq.ravel() / hq.sum()
    return float(0.5 * np.abs(p - q).sum())


def write_trace_csv(trace: ChainTrace, path) -> None:
    """CSV export: header step,x0,...,x{n-1}; one row per accepted state."""
    n = trace.states.shape[1]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step"] + [f"x{i}" for i in range(n)])
        for k, row in enumerate(trace.states):
            w.writerow([k] + [f"{x:.17g}" for x in row])
