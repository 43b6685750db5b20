"""Distances, conductance and mixing-time bounds, and their Monte-Carlo checkers.

The cross-ratio distance along a chord drives everything here: the chain
distance generalizes it to non-convex spaces through visible waypoint
chains, the worst chord-to-boundary ratio at a given interior depth
controls how those distances degrade near the boundary, and the closed-form
conductance lower bound composes all of the constants into a mixing-time
guarantee. Each proven inequality gets a sampling checker that hunts for
counterexamples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .geometry import Ball, FreeSpace
from .planner import uniform_point
from .sampler import ensure_rng, random_direction, unit_ball_volume


class UnreachableError(RuntimeError):
    """No visible waypoint chain connects the two query points."""


def normalized_ball_radius(n: int) -> float:
    """Radius r with r^n * vol(B_n) = 1 (unit-volume reference ball)."""
    return unit_ball_volume(n) ** (-1.0 / n)


# ---------------------------------------------------------------------------
# Cross-ratio distances


@dataclass(frozen=True)
class CrossRatioSample:
    """Chord endpoints and value of one cross-ratio evaluation."""

    a: np.ndarray
    b: np.ndarray
    u: np.ndarray
    v: np.ndarray
    value: float


def cross_ratio(space: FreeSpace, u, v) -> CrossRatioSample:
    """Cross-ratio distance |a-b||u-v| / (|a-u||v-b|) along the chord through u, v.

    a and b are the ends of the maximal visible chord, a on u's side. The two
    points must see each other; use chain_distance otherwise. u = v returns a
    zero-distance sample.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    gap = float(np.linalg.norm(v - u))
    if gap < 1e-15:
        return CrossRatioSample(a=u.copy(), b=u.copy(), u=u, v=v, value=0.0)
    if not space.sees(u, v):
        raise ValueError("points do not see each other; use chain_distance instead")
    d = (v - u) / gap
    lo, hi = space.chord_span(u, d)
    a = u + lo * d
    b = u + hi * d
    au = float(np.linalg.norm(u - a))
    vb = float(np.linalg.norm(b - v))
    ab = float(np.linalg.norm(b - a))
    if au < 1e-15 or vb < 1e-15:
        return CrossRatioSample(a=a, b=b, u=u, v=v, value=math.inf)
    return CrossRatioSample(a=a, b=b, u=u, v=v, value=ab * gap / (au * vb))


def chain_distance(space: FreeSpace, u, v, waypoints: int = 512, rng=None):
    """Approximate infimum of summed cross-ratios over visible waypoint chains.

    Builds a visibility graph over `waypoints` uniform samples plus the two
    query points, weights edges by cross-ratio, and runs Dijkstra. Returns
    (distance, witness chain including u and v).
    """
    rng = ensure_rng(rng)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if float(np.linalg.norm(u - v)) < 1e-15:
        return 0.0, np.array([u, v])
    pts = np.empty((waypoints + 2, space.dimension))
    pts[0] = u
    pts[1] = v
    for i in range(waypoints):
        pts[2 + i] = uniform_point(space, rng)
    m = len(pts)
    ii, jj = np.triu_indices(m, k=1)
    vis = space.sees_many(pts[ii], pts[jj])
    rows, cols, weights = [], [], []
    for k in np.nonzero(vis)[0]:
        i, j = int(ii[k]), int(jj[k])
        w = cross_ratio(space, pts[i], pts[j]).value
        if not math.isfinite(w):
            continue
        rows.append(i)
        cols.append(j)
        weights.append(w)
    graph = csr_matrix((weights, (rows, cols)), shape=(m, m))
    dist, pred = dijkstra(graph, directed=False, indices=0, return_predecessors=True)
    if not np.isfinite(dist[1]):
        raise UnreachableError(
            "no visible chain found within the waypoint budget; "
            "increase waypoints or check connectedness"
        )
    chain = [1]
    while chain[-1] != 0:
        chain.append(int(pred[chain[-1]]))
    witness = pts[np.array(chain[::-1])]
    return float(dist[1]), witness


# ---------------------------------------------------------------------------
# Worst chord-to-boundary ratio at interior depth eps (reference ball)


@dataclass(frozen=True)
class RatioEstimate:
    """Monte-Carlo maximum with its analytic cap radius/depth."""

    value: float
    cap: float


def ball_chord_ratio_exact(radius: float, depth: float) -> float:
    """Exact worst ratio for the ball: sqrt(2 r / depth - 1).

    At interior depth d the longest near-half-chord is sqrt(r^2 - (r-d)^2)
    (the chord perpendicular to the radius) and the nearest boundary point
    sits at distance d; the ratio decreases with depth.
    """
    if not 0 < depth < radius:
        raise ValueError("depth must lie strictly between 0 and the radius")
    return math.sqrt(2.0 * radius / depth - 1.0)


def chord_to_boundary_ratio(omega_radius: float, eps: float, samples: int = 100000,
                            rng=None) -> RatioEstimate:
    """Monte-Carlo maximization of |x-b| / |x-c| over chord configurations.

    x ranges over points at depth >= eps inside the ball, b is the nearer
    endpoint of a chord through x, and c is any boundary point. Half of the
    sampled depths are biased toward eps where the ratio peaks; the analytic
    cap radius/eps is reported alongside.
    """
    if not 0 < eps < omega_radius:
        raise ValueError("eps must lie strictly between 0 and the ball radius")
    rng = ensure_rng(rng)
    r = float(omega_radius)
    n = 2
    half = samples // 2
    u_depth = rng.random(samples)
    depth = np.empty(samples)
    depth[:half] = eps + (r - eps) * u_depth[:half]
    depth[half:] = eps + (r - eps) * u_depth[half:] ** 4
    d_center = r - depth  # distance of x from the center
    # chord through x: |x - b| = min over the two endpoint offsets
    theta = rng.random(samples) * 2.0 * math.pi  # angle between chord and radius
    b_dot = d_center * np.cos(theta)
    disc = np.sqrt(np.maximum(r * r - d_center * d_center * np.sin(theta) ** 2, 0.0))
    near = np.minimum(np.abs(-b_dot + disc), np.abs(-b_dot - disc))
    # boundary point c at a random angle from x's radial direction
    phi = rng.random(samples) * 2.0 * math.pi
    xc = np.sqrt(d_center**2 + r * r - 2.0 * d_center * r * np.cos(phi))
    xc = np.maximum(xc, 1e-300)
    value = float(np.max(near / xc))
    return RatioEstimate(value=value, cap=r / eps)


# ---------------------------------------------------------------------------
# Checkers


@dataclass
class CheckReport:
    """Uniform result record for the sampling checkers."""

    checker: str
    trials: int
    violations: int
    min_margin: float
    config: dict = field(default_factory=dict)
    skipped: str | None = None

    def to_dict(self) -> dict:
        doc = {
            "checker": self.checker,
            "trials": self.trials,
            "violations": self.violations,
            "min_margin": self.min_margin,
            "config": self.config,
        }
        if self.skipped is not None:
            doc["skipped"] = self.skipped
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def check_cross_ratio_bound(omega_radius: float, eps: float, trials: int = 10000,
                            rng=None, r_eps: float | None = None) -> CheckReport:
    """Hunt for violations of the chained cross-ratio lower bound on the ball.

    Configurations: a chord {a, x1, x2, b} with both interior points at depth
    >= eps and |x1-a| < |x2-a|, plus independent boundary points c, d. The
    product (|b-a|/|a-x1|) (|x1-c|/|c-d|) (|d-x2|/|x2-b|) must stay above
    1 / (4 R (1 + 2R)) where R is the worst chord-to-boundary ratio at depth
    eps. Requires R(1 + 8R) >= 2/3.
    """
    rng = ensure_rng(rng)
    r = float(omega_radius)
    R = ball_chord_ratio_exact(r, eps) if r_eps is None else float(r_eps)
    config = {"omega_radius": r, "eps": eps, "r_eps": R}
    if R * (1.0 + 8.0 * R) < 2.0 / 3.0:
        return CheckReport("cross_ratio_bound", 0, 0, math.nan, config,
                           skipped="hypothesis R(1+8R) >= 2/3 fails at this depth")
    bound = 1.0 / (4.0 * R * (1.0 + 2.0 * R))
    config["bound"] = bound

    # chords through a uniform interior anchor; interior points drawn from the
    # sub-interval of the chord at depth >= eps
    anchor_dir = rng.standard_normal((trials, 2))
    anchor_dir /= np.linalg.norm(anchor_dir, axis=1, keepdims=True)
    anchor = anchor_dir * (r - eps) * np.sqrt(rng.random(trials))[:, None]
    cd = rng.standard_normal((trials, 2))
    cd /= np.linalg.norm(cd, axis=1, keepdims=True)
    # chord of the full ball through the anchor
    bdot = np.einsum("ij,ij->i", anchor, cd)
    full_disc = np.sqrt(np.maximum(r * r - np.einsum("ij,ij->i", anchor, anchor)
                                   + bdot * bdot, 0.0))
    t_a, t_b = -bdot - full_disc, -bdot + full_disc
    # sub-interval still at depth >= eps
    rin = r - eps
    in_disc = r * r - np.einsum("ij,ij->i", anchor, anchor) + bdot * bdot \
        - (r * r - rin * rin)
    in_disc = np.sqrt(np.maximum(in_disc, 0.0))
    s_lo, s_hi = -bdot - in_disc, -bdot + in_disc
    t1 = s_lo + (s_hi - s_lo) * rng.random(trials)
    t2 = s_lo + (s_hi - s_lo) * rng.random(trials)
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    a = anchor + t_a[:, None] * cd
    b = anchor + t_b[:, None] * cd
    x1 = anchor + lo[:, None] * cd
    x2 = anchor + hi[:, None] * cd
    cpt = rng.standard_normal((trials, 2))
    cpt = cpt / np.linalg.norm(cpt, axis=1, keepdims=True) * r
    dpt = rng.standard_normal((trials, 2))
    dpt = dpt / np.linalg.norm(dpt, axis=1, keepdims=True) * r

    def dist(p, q):
        return np.linalg.norm(p - q, axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = (dist(b, a) / dist(a, x1)) * (dist(x1, cpt) / dist(cpt, dpt)) \
            * (dist(dpt, x2) / dist(x2, b))
    valid = np.isfinite(lhs) & (dist(x1, x2) > 1e-12)
    margins = lhs[valid] - bound
    violations = int(np.sum(margins < 0))
    return CheckReport("cross_ratio_bound", int(valid.sum()), violations,
                       float(margins.min()) if margins.size else math.nan, config)


def check_chain_triangle(chord_points) -> bool:
    """Exact check that stepping through intermediate points never adds distance.

    For collinear a < y_1 < ... < y_m < b on one chord, the summed consecutive
    cross-ratios stay below the direct one: sum d(y_i, y_i+1) <= d(y_1, y_m).
    """
    pts = np.asarray(chord_points, dtype=float)
    if pts.ndim != 1 or pts.shape[0] < 4:
        raise ValueError("need collinear reals a, y_1, ..., y_m, b with m >= 2")
    if not np.all(np.diff(pts) > 0):
        raise ValueError("points must be strictly increasing along the chord")
    a, b = pts[0], pts[-1]
    ys = pts[1:-1]

    def d(yi, yj):
        return (b - a) * (yj - yi) / ((yi - a) * (b - yj))

    total = sum(d(ys[i], ys[i + 1]) for i in range(len(ys) - 1))
    return bool(total <= d(ys[0], ys[-1]) * (1.0 + 1e-12))


def check_lipschitz_identity(omega: Ball, eps: float, pairs: int = 10000,
                             rng=None, r_eps: float | None = None) -> CheckReport:
    """Identity-map sanity check of the chain-distance Lipschitz bound.

    On a convex space mapped to itself the bound collapses to
    d(x1, x2) <= 4 R (1 + 2R) d(x1, x2); both sides are still evaluated
    through the real cross-ratio code path.
    """
    rng = ensure_rng(rng)
    if not isinstance(omega, Ball):
        raise ValueError("the identity-map check runs on a ball")
    r = omega.radius
    if not 0 < eps < r:
        raise ValueError("eps must lie strictly between 0 and the radius")
    R = ball_chord_ratio_exact(r, eps) if r_eps is None else float(r_eps)
    factor = 4.0 * R * (1.0 + 2.0 * R)
    violations = 0
    min_margin = math.inf
    n = omega.dimension
    for _ in range(pairs):
        x1 = omega.center + _uniform_in_ball(n, r - eps, rng)
        x2 = omega.center + _uniform_in_ball(n, r - eps, rng)
        d = cross_ratio(omega, x1, x2).value
        margin = factor * d - d
        if margin < 0:
            violations += 1
        min_margin = min(min_margin, margin)
    return CheckReport("lipschitz_identity", pairs, violations, float(min_margin),
                       {"omega_radius": r, "eps": eps, "r_eps": R, "factor": factor})


def _uniform_in_ball(n: int, radius: float, rng) -> np.ndarray:
    d = random_direction(n, rng)
    return d * radius * rng.random() ** (1.0 / n)


# ---------------------------------------------------------------------------
# Conductance and mixing time


@dataclass(frozen=True)
class ConstantsProfile:
    """User-supplied constants of the embedding and curvature assumptions.

    The sampler never needs these; they exist so the closed-form bounds can
    be evaluated. Both Lipschitz constants are at least 1 for any
    measure-preserving bilipschitz map.
    """

    L_Sigma: float
    L_Omega: float
    kappa: float
    r: float
    n: int
    D_Sigma: float
    D_Omega: float

    def __post_init__(self):
        if self.L_Sigma < 1.0 or self.L_Omega < 1.0:
            raise ValueError("Lipschitz constants are at least 1")
        if self.kappa <= 0 or self.r <= 0 or self.D_Sigma <= 0 or self.D_Omega <= 0:
            raise ValueError("kappa, r and the diameters must be positive")
        if self.n < 2:
            raise ValueError("dimension must be at least 2")


@dataclass(frozen=True)
class BoundBreakdown:
    """Intermediate quantities of the conductance lower bound."""

    delta: float
    G: float
    eps_prime: float
    N: float
    r_eps_prime: float
    phi: float


def conductance_lower_bound(profile: ConstantsProfile,
                            r_eps_prime: float | None = None) -> BoundBreakdown:
    """Closed-form conductance lower bound from the constants profile.

    delta = 9r / (320 e^4 n L_Omega D_Sigma)
    G     = (1/6) min(pi/4, sin(pi/8)/kappa)
    eps'  = 9r / (20 n)
    N     = 9r / (80 n L_Sigma^2 L_Omega^3 R(1+2R))
    phi   = (delta/4) min( 2/(5 n D_Omega),
                           N min( 1/(24 D_Sigma),
                                  (2/sqrt n) min(1/(8 sqrt n), G) ) )

    R defaults to the conservative analytic cap r/eps' of the worst
    chord-to-boundary ratio; pass a measured value to tighten the bound.
    """
    p = profile
    eps_prime = 9.0 * p.r / (20.0 * p.n)
    R = p.r / eps_prime if r_eps_prime is None else float(r_eps_prime)
    if R <= 0:
        raise ValueError("chord-to-boundary ratio must be positive")
    delta = 9.0 * p.r / (320.0 * math.e**4 * p.n * p.L_Omega * p.D_Sigma)
    G = (1.0 / 6.0) * min(math.pi / 4.0, math.sin(math.pi / 8.0) / p.kappa)
    N = 9.0 * p.r / (80.0 * p.n * p.L_Sigma**2 * p.L_Omega**3 * R * (1.0 + 2.0 * R))
    rn = math.sqrt(p.n)
    inner = N * min(1.0 / (24.0 * p.D_Sigma), (2.0 / rn) * min(1.0 / (8.0 * rn), G))
    phi = (delta / 4.0) * min(2.0 / (5.0 * p.n * p.D_Omega), inner)
    out = BoundBreakdown(delta=delta, G=G, eps_prime=eps_prime, N=N,
                         r_eps_prime=R, phi=phi)
    for v in (delta, G, eps_prime, N, phi):
        if not (math.isfinite(v) and v > 0):
            raise ValueError("non-finite quantity in the conductance bound")
    return out


def mixing_time_bound(phi: float, M: float, eps_tv: float) -> int:
    """Steps until sqrt(M) (1 - phi^2/2)^t drops below eps_tv.

    M bounds the start-distribution density ratio against uniform; the decay
    rate comes from the conductance phi.
    """
    if not 0 < phi <= 1:
        raise ValueError("phi must lie in (0, 1]")
    if M < 1:
        raise ValueError("M is a sup of density ratios, so M >= 1")
    if eps_tv <= 0:
        raise ValueError("eps_tv must be positive")
    start = math.sqrt(M)
    if start <= eps_tv:
        return 0
    rate = -math.log1p(-phi * phi / 2.0)
    return int(math.ceil(math.log(start / eps_tv) / rate))


def empirical_conductance(space: FreeSpace, partition, samples: int = 100000,
                          rng=None, with_stderr: bool = False):
    """Monte-Carlo conductance of one partition under the one-step kernel.

    `partition` maps an (k, n) array to a boolean array selecting side A.
    Uniform points u are drawn by rejection, one transition w is sampled
    from each, and the estimate is mean(u in A, w not in A) / min(volume
    fractions). The stderr covers flux noise only.
    """
    rng = ensure_rng(rng)
    lo, hi = space.bounding_box()
    n = space.dimension
    pts = np.empty((samples, n))
    count = 0
    while count < samples:
        cand = lo + (hi - lo) * rng.random((samples, n))
        good = cand[space.contains_many(cand)]
        take = min(len(good), samples - count)
        pts[count:count + take] = good[:take]
        count += take
    steps = np.empty_like(pts)
    for i in range(samples):
        d = random_direction(n, rng)
        slo, shi = space.chord_span(pts[i], d)
        steps[i] = pts[i] + (slo + (shi - slo) * rng.random()) * d
    in_a = np.asarray(partition(pts), dtype=bool)
    in_a_next = np.asarray(partition(steps), dtype=bool)
    p_a = in_a.mean()
    denom = min(p_a, 1.0 - p_a)
    if denom <= 0:
        raise ValueError("partition must split the space into two positive-volume parts")
    flux = float(np.mean(in_a & ~in_a_next))
    phi = flux / denom
    if not with_stderr:
        return phi
    stderr = math.sqrt(max(flux * (1.0 - flux), 1e-300) / samples) / denom
    return phi, stderr


# ---------------------------------------------------------------------------
# Isoperimetric inequality check


@dataclass(frozen=True)
class BandPartition:
    """Split of a ball by a band of `width` around the plane normal . x = offset."""

    normal: np.ndarray
    offset: float = 0.0
    width: float = 0.1

    def __post_init__(self):
        nrm = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "normal", nrm / np.linalg.norm(nrm))
        if self.width < 0:
            raise ValueError("band width must be non-negative")

    def classify(self, pts: np.ndarray) -> np.ndarray:
        """0, 1, 2 for the two sides and the separating band."""
        s = pts @ self.normal - self.offset
        out = np.full(len(pts), 2)
        out[s > self.width / 2.0] = 0
        out[s < -self.width / 2.0] = 1
        return out


@dataclass(frozen=True)
class IsoperimetryResult:
    holds: bool
    margin: float
    stderr: float
    vol1: float
    vol2: float
    vol3: float
    h_value: float


def band_h_value(radius: float, width: float) -> float:
    """Largest constant h admissible for a band partition of a ball.

    Any chord joining the two sides crosses the band, so its cross-ratio
    distance is at least 8 r w / (2r - w)^2 (worst case: a diameter chord);
    h = (1/3) min(1, that infimum).
    """
    if width <= 0:
        return 0.0
    dmin = 8.0 * radius * width / (2.0 * radius - width) ** 2
    return (1.0 / 3.0) * min(1.0, dmin)


def check_isoperimetry(omega: Ball, band: BandPartition, samples: int = 200000,
                       rng=None, h_value: float | None = None,
                       hypothesis_pairs: int = 2000) -> IsoperimetryResult:
    """Monte-Carlo check of vol(band) >= E(h) min(vol(side1), vol(side2)).

    h is a constant function; the default is the largest admissible constant
    for the band. The admissibility hypothesis h <= (1/3) min(1, d(x, y)) is
    itself re-checked on sampled cross-side pairs before the volume test.
    """
    rng = ensure_rng(rng)
    r = omega.radius
    h = band_h_value(r, band.width) if h_value is None else float(h_value)
    n = omega.dimension
    pts = omega.center + np.array([_uniform_in_ball(n, r, rng) for _ in range(samples)])
    cls = band.classify(pts - omega.center)
    f1 = float(np.mean(cls == 0))
    f2 = float(np.mean(cls == 1))
    f3 = float(np.mean(cls == 2))
    total = unit_ball_volume(n) * r**n
    # hypothesis check on sampled cross-side pairs
    side1 = pts[cls == 0]
    side2 = pts[cls == 1]
    if len(side1) and len(side2) and h > 0:
        k = min(hypothesis_pairs, len(side1), len(side2))
        idx1 = rng.integers(0, len(side1), k)
        idx2 = rng.integers(0, len(side2), k)
        for x, y in zip(side1[idx1], side2[idx2]):
            d = cross_ratio(omega, x, y).value
            if h > (1.0 / 3.0) * min(1.0, d) + 1e-12:
                raise ValueError("supplied h violates the chord hypothesis")
    margin = (f3 - h * min(f1, f2)) * total
    var = (f3 * (1 - f3) + h * h * max(f1 * (1 - f1), f2 * (1 - f2))) / samples
    stderr = math.sqrt(var) * total
    return IsoperimetryResult(holds=bool(margin >= -3.0 * stderr),
                              margin=float(margin), stderr=float(stderr),
                              vol1=f1 * total, vol2=f2 * total, vol3=f3 * total,
                              h_value=h)
