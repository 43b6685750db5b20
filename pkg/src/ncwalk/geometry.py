"""Free-space representations and the two oracle queries they answer.

A free space is a bounded connected region of R^n exposing membership
(`contains`), the maximal visible interval of a line through an interior
point (`chord`), segment visibility (`sees`), and a diameter. 2D maps are
polygons with optional holes; boxes and balls are kept analytic in any
dimension; arbitrary membership functions are supported through sampling
and bisection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

# Tolerances: exact polygon predicates run at EPS_GEO; implicit-space
# bracketing stops at EPS_IMPLICIT (workspace units).
EPS_GEO = 1e-9
EPS_IMPLICIT = 1e-6


class RejectionBudgetError(RuntimeError):
    """Rejection sampling exhausted its draw budget."""


@dataclass(frozen=True)
class Chord:
    """Maximal free interval of a line through a query point.

    `a` is the endpoint reached along -direction, `b` along +direction;
    the query point lies on [a, b].
    """

    a: np.ndarray
    b: np.ndarray
    direction: np.ndarray

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))


class FreeSpace:
    """Oracle interface shared by all space types. Immutable once built."""

    dimension: int
    name: str = "space"

    # -- required queries -------------------------------------------------
    def contains(self, p) -> bool:
        raise NotImplementedError

    def chord_span(self, u, direction) -> tuple[float, float]:
        """(t_lo, t_hi) such that u + t*direction stays inside for t in [t_lo, t_hi]."""
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    # -- shared derived queries -------------------------------------------
    def _check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dimension,):
            raise ValueError(
                f"point of dimension {p.shape} does not match space dimension {self.dimension}"
            )
        return p

    def contains_many(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.array([self.contains(p) for p in pts], dtype=bool)

    def chord(self, u, direction) -> Chord:
        """Maximal visible interval of the line through u along `direction`.

        Raises ValueError when u is outside the space.
        """
        u = self._check_point(u)
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        if not self.contains(u):
            raise ValueError("chord query point lies outside the free space")
        lo, hi = self.chord_span(u, d)
        return Chord(a=u + lo * d, b=u + hi * d, direction=d)

    def sees(self, u, v) -> bool:
        """True when the straight segment [u, v] stays inside the space."""
        u = self._check_point(u)
        v = self._check_point(v)
        if not (self.contains(u) and self.contains(v)):
            return False
        return self.first_exit(u, v) >= 1.0

    def sees_many(self, A, B) -> np.ndarray:
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        return np.array([self.sees(a, b) for a, b in zip(A, B)], dtype=bool)

    def first_exit(self, a, b) -> float:
        """Largest t in [0,1] with [a, a+t*(b-a)] inside; a must be inside.

        Generic implementation: dense scan plus bisection of the first
        outside bracket. Exact overrides exist for polygons and convex shapes.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        seg = b - a
        n_samples = 1024
        ts = np.linspace(0.0, 1.0, n_samples + 1)
        ins = self.contains_many(a[None, :] + ts[:, None] * seg[None, :])
        bad = np.nonzero(~ins)[0]
        if bad.size == 0:
            return 1.0
        j = int(bad[0])
        lo, hi = ts[j - 1], ts[j]
        scale = max(np.linalg.norm(seg), 1.0)
        while (hi - lo) * scale > EPS_IMPLICIT:
            mid = 0.5 * (lo + hi)
            if self.contains(a + mid * seg):
                lo = mid
            else:
                hi = mid
        return float(lo)

    def describe(self) -> str:
        return self.name


@dataclass(frozen=True)
class Box(FreeSpace):
    """Axis-aligned box [lo, hi] in any dimension."""

    lo: np.ndarray
    hi: np.ndarray
    name: str = "box"

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if not np.all(self.hi > self.lo):
            raise ValueError("box needs hi > lo on every axis")

    @property
    def dimension(self) -> int:
        return self.lo.shape[0]

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lo - EPS_GEO) and np.all(p <= self.hi + EPS_GEO))

    def contains_many(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.all((pts >= self.lo - EPS_GEO) & (pts <= self.hi + EPS_GEO), axis=1)

    def chord_span(self, u, direction):
        u = np.asarray(u, dtype=float)
        d = np.asarray(direction, dtype=float)
        with np.errstate(divide="ignore"):
            t1 = (self.lo - u) / d
            t2 = (self.hi - u) / d
        lo = np.where(np.isfinite(t1), np.minimum(t1, t2), -np.inf)
        hi = np.where(np.isfinite(t1), np.maximum(t1, t2), np.inf)
        return float(lo.max()), float(hi.min())

    def sees(self, u, v) -> bool:
        return self.contains(u) and self.contains(v)

    def first_exit(self, a, b) -> float:
        if self.contains(b):
            return 1.0
        lo, hi = self.chord_span(np.asarray(a, float),
                                 np.asarray(b, float) - np.asarray(a, float))
        return float(min(max(hi, 0.0), 1.0))

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))


@dataclass(frozen=True)
class Ball(FreeSpace):
    """Euclidean ball in any dimension."""

    center: np.ndarray
    radius: float
    name: str = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.linalg.norm(p - self.center) <= self.radius + EPS_GEO)

    def contains_many(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.linalg.norm(pts - self.center, axis=1) <= self.radius + EPS_GEO

    def chord_span(self, u, direction):
        # |u + t d - c|^2 = r^2 with |d| = 1
        w = np.asarray(u, dtype=float) - self.center
        b = float(np.dot(w, direction))
        c = float(np.dot(w, w)) - self.radius**2
        disc = max(b * b - c, 0.0)
        s = np.sqrt(disc)
        return -b - s, -b + s

    def sees(self, u, v) -> bool:
        return self.contains(u) and self.contains(v)

    def first_exit(self, a, b) -> float:
        if self.contains(b):
            return 1.0
        seg = np.asarray(b, float) - np.asarray(a, float)
        L = np.linalg.norm(seg)
        _, hi = self.chord_span(np.asarray(a, float), seg / L)
        return float(min(max(hi / L, 0.0), 1.0))

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def diameter(self) -> float:
        return 2.0 * self.radius


class PolygonMap(FreeSpace):
    """Polygon with holes; the canonical exact 2D representation.

    Free space is the outer polygon minus the hole polygons. All predicates
    are exact segment/edge intersections at EPS_GEO; the boundary counts as
    inside.
    """

    dimension = 2

    def __init__(self, outer, holes=(), name="polygon"):
        outer = np.asarray(outer, dtype=float)
        if outer.ndim != 2 or outer.shape[0] < 3 or outer.shape[1] != 2:
            raise ValueError("outer ring must be an (k>=3, 2) array")
        self.outer = _orient(outer, ccw=True)
        self.holes = [_orient(np.asarray(h, dtype=float), ccw=False) for h in holes]
        self.name = name
        rings = [self.outer] + self.holes
        starts = np.concatenate([r for r in rings])
        ends = np.concatenate([np.roll(r, -1, axis=0) for r in rings])
        self._edges = np.concatenate([starts, ends], axis=1)
        self._verts = starts

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(_kernels.point_in_polygon(self._edges, p[0], p[1], EPS_GEO))

    def contains_many(self, pts) -> np.ndarray:
        pts = np.ascontiguousarray(np.asarray(pts, dtype=float))
        return _kernels.points_in_polygon(self._edges, pts, EPS_GEO)

    def chord_span(self, u, direction):
        return _kernels.chord_span(
            self._edges, float(u[0]), float(u[1]),
            float(direction[0]), float(direction[1]), EPS_GEO,
        )

    def first_exit(self, a, b) -> float:
        return float(
            _kernels.first_exit(
                self._edges, float(a[0]), float(a[1]), float(b[0]), float(b[1]), EPS_GEO
            )
        )

    def sees(self, u, v) -> bool:
        if not (self.contains(u) and self.contains(v)):
            return False
        return self.first_exit(u, v) >= 1.0

    def sees_many(self, A, B) -> np.ndarray:
        A = np.ascontiguousarray(np.asarray(A, dtype=float))
        B = np.ascontiguousarray(np.asarray(B, dtype=float))
        return _kernels.segments_free_batch(self._edges, A, B, EPS_GEO)

    def bounding_box(self):
        return self.outer.min(axis=0), self.outer.max(axis=0)

    def diameter(self) -> float:
        v = self._verts
        d2 = ((v[:, None, :] - v[None, :, :]) ** 2).sum(axis=2)
        return float(np.sqrt(d2.max()))


class ImplicitSpace(FreeSpace):
    """Membership-function space with a bounding box.

    `fn` must accept an (k, n) array and return a boolean array; chords are
    bracketed by stepping at `resolution` then bisected to EPS_IMPLICIT.
    """

    def __init__(self, fn, lo, hi, resolution=0.01, name="implicit", sees_samples=1000):
        self.fn = fn
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.resolution = float(resolution)
        self.sees_samples = int(sees_samples)
        self.name = name

    @property
    def dimension(self) -> int:
        return self.lo.shape[0]

    def contains(self, p) -> bool:
        return bool(self.fn(np.asarray(p, dtype=float)[None, :])[0])

    def contains_many(self, pts) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(pts, dtype=float)), dtype=bool)

    def _march(self, u, d):
        """Distance along +d until the first outside sample, bisected to tolerance."""
        span = np.linalg.norm(self.hi - self.lo) * 1.001
        ts = np.arange(0.0, span + self.resolution, self.resolution)
        ins = self.contains_many(u[None, :] + ts[:, None] * d[None, :])
        bad = np.nonzero(~ins)[0]
        if bad.size == 0:
            return float(ts[-1])
        j = int(bad[0])
        lo, hi = (0.0, 0.0) if j == 0 else (ts[j - 1], ts[j])
        while hi - lo > EPS_IMPLICIT:
            mid = 0.5 * (lo + hi)
            if self.contains(u + mid * d):
                lo = mid
            else:
                hi = mid
        return float(lo)

    def chord_span(self, u, direction):
        u = np.asarray(u, dtype=float)
        d = np.asarray(direction, dtype=float)
        return -self._march(u, -d), self._march(u, d)

    def sees(self, u, v) -> bool:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if not (self.contains(u) and self.contains(v)):
            return False
        ts = np.linspace(0.0, 1.0, self.sees_samples + 2)
        return bool(np.all(self.contains_many(u[None, :] + ts[:, None] * (v - u)[None, :])))

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def diameter(self) -> float:
        # upper bound: the bounding-box diagonal
        return float(np.linalg.norm(self.hi - self.lo))


def _orient(ring: np.ndarray, ccw: bool) -> np.ndarray:
    x, y = ring[:, 0], ring[:, 1]
    area2 = float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    if (area2 > 0) != ccw:
        return ring[::-1].copy()
    return ring.copy()


# ---------------------------------------------------------------------------
# Goal regions


@dataclass(frozen=True)
class BallGoal:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    def contains(self, p) -> bool:
        return bool(np.linalg.norm(np.asarray(p, float) - self.center) <= self.radius)


@dataclass(frozen=True)
class BoxGoal:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))


GoalRegion = BallGoal | BoxGoal


@dataclass
class ProblemMap:
    """A free space bundled with its start point and goal region."""

    space: FreeSpace
    start: np.ndarray
    goal: GoalRegion
    name: str = "map"
    width: float = float("nan")


@dataclass
class MapSpec:
    """Declarative map request, dispatched by generate_map."""

    kind: str
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Built-in map generators


def _offset_corridor_ring(points: np.ndarray, dirs: np.ndarray, width: float) -> np.ndarray:
    """Polygon ring of a corridor of `width` around an axis-aligned polyline.

    Right-angle turns take miter joins; the termini get flat caps.
    """
    h = width / 2.0
    nrm = np.stack([-dirs[:, 1], dirs[:, 0]], axis=1)  # left normals
    left = [points[0] + nrm[0] * h]
    right = [points[0] - nrm[0] * h]
    for i in range(1, len(points) - 1):
        j = nrm[i - 1] + nrm[i]
        left.append(points[i] + j * h)
        right.append(points[i] - j * h)
    left.append(points[-1] + nrm[-1] * h)
    right.append(points[-1] - nrm[-1] * h)
    return np.array(left + right[::-1])


def _polyline(start, moves):
    pts = [np.asarray(start, dtype=float)]
    dirs = []
    for d, length in moves:
        d = np.asarray(d, dtype=float)
        pts.append(pts[-1] + d * length)
        dirs.append(d)
    return np.array(pts), np.array(dirs)


def spiral_map(width: float, loops: float = 2.5, arm_length_scale: float = 10.0,
               wall: float = 0.2, pitch: float | None = None) -> ProblemMap:
    """Rectangular axis-aligned spiral corridor.

    The centerline winds inward on a lattice of spacing `pitch` (default
    width + wall, i.e. arms of the requested width separated by thin walls);
    the outer side length is arm_length_scale * width. Start sits just inside
    the outer terminus, the goal ball of radius width/2 at the inner
    terminus. Wider arms between the same thin walls make the map easier.
    """
    if width <= 0:
        raise ValueError("spiral arm width must be positive")
    if loops < 1:
        raise ValueError("spiral needs at least one loop")
    if wall <= 0:
        raise ValueError("spiral wall thickness must be positive")
    p = width + wall if pitch is None else float(pitch)
    if p <= width:
        raise ValueError("spiral pitch must exceed the arm width")
    side = arm_length_scale * width
    n_legs = int(round(4 * loops))
    lengths = [side, side, side]
    k = 1
    while len(lengths) < n_legs:
        lengths.append(side - k * p)
        if len(lengths) < n_legs:
            lengths.append(side - k * p)
        k += 1
    if min(lengths) <= 0:
        raise ValueError("spiral legs collapse: increase arm_length_scale or reduce loops")
    axes = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
    moves = [(axes[i % 4], lengths[i]) for i in range(n_legs)]
    pts, dirs = _polyline((0.0, 0.0), moves)
    ring = _offset_corridor_ring(pts, dirs, width)
    space = PolygonMap(ring, name=f"spiral(w={width:g})")
    start = pts[0] + dirs[0] * (width / 2.0)
    goal = BallGoal(center=pts[-1] - dirs[-1] * (width / 2.0), radius=width / 2.0)
    return ProblemMap(space=space, start=start, goal=goal, name="spiral", width=width)


def corridor_map(width: float, legs=(10.0, 10.0, 10.0)) -> ProblemMap:
    """S-shaped corridor: three straight legs glued at two right-angle turns."""
    if width <= 0:
        raise ValueError("corridor width must be positive")
    if len(legs) != 3 or min(legs) <= 0:
        raise ValueError("corridor takes three positive leg lengths")
    moves = [((1.0, 0.0), legs[0]), ((0.0, 1.0), legs[1]), ((1.0, 0.0), legs[2])]
    pts, dirs = _polyline((0.0, 0.0), moves)
    ring = _offset_corridor_ring(pts, dirs, width)
    space = PolygonMap(ring, name=f"corridor(w={width:g})")
    start = pts[0] + dirs[0] * (width / 2.0)
    goal = BallGoal(center=pts[-1] - dirs[-1] * (width / 2.0), radius=width / 2.0)
    return ProblemMap(space=space, start=start, goal=goal, name="corridor", width=width)


def dumbbell_map(neck_width: float = 0.05, neck_length: float = 0.2) -> ProblemMap:
    """Two unit boxes joined by a thin neck; the standard low-conductance map."""
    if not 0 < neck_width < 1:
        raise ValueError("neck width must be in (0, 1)")
    h = neck_width / 2.0
    nl = neck_length
    ring = np.array([
        (0.0, 0.0), (1.0, 0.0), (1.0, 0.5 - h), (1.0 + nl, 0.5 - h),
        (1.0 + nl, 0.0), (2.0 + nl, 0.0), (2.0 + nl, 1.0), (1.0 + nl, 1.0),
        (1.0 + nl, 0.5 + h), (1.0, 0.5 + h), (1.0, 1.0), (0.0, 1.0),
    ])
    space = PolygonMap(ring, name=f"dumbbell(neck={neck_width:g})")
    start = np.array([0.5, 0.5])
    goal = BallGoal(center=np.array([1.5 + nl, 0.5]), radius=0.1)
    return ProblemMap(space=space, start=start, goal=goal, name="dumbbell", width=neck_width)


def box_map(lo=(0.0, 0.0), hi=(1.0, 1.0)) -> ProblemMap:
    space = Box(lo=np.asarray(lo, float), hi=np.asarray(hi, float))
    span = space.hi - space.lo
    start = space.lo + 0.1 * span
    goal = BallGoal(center=space.hi - 0.1 * span, radius=0.1 * float(np.min(span)))
    return ProblemMap(space=space, start=start, goal=goal, name="box")


def ball_map(radius: float = 1.0, n: int = 2) -> ProblemMap:
    space = Ball(center=np.zeros(n), radius=float(radius))
    start = np.zeros(n)
    start[0] = -0.5 * radius
    goal_c = np.zeros(n)
    goal_c[0] = 0.6 * radius
    goal = BallGoal(center=goal_c, radius=0.2 * radius)
    return ProblemMap(space=space, start=start, goal=goal, name="ball")


def generate_map(spec: MapSpec) -> ProblemMap:
    kind = spec.kind
    if kind == "spiral":
        return spiral_map(**spec.params)
    if kind == "corridor":
        return corridor_map(**spec.params)
    if kind == "dumbbell":
        return dumbbell_map(**spec.params)
    if kind == "box":
        return box_map(**spec.params)
    if kind == "ball":
        return ball_map(**spec.params)
    if kind == "polygon_file":
        return load_map(spec.params["path"])
    raise ValueError(f"unknown map kind: {kind!r}")


# ---------------------------------------------------------------------------
# Map file format


def map_to_dict(pm: ProblemMap) -> dict:
    space = pm.space
    if not isinstance(space, PolygonMap):
        raise ValueError("only polygon maps serialize to the map file format")
    goal = pm.goal
    if isinstance(goal, BallGoal):
        goal_doc = {"ball": {"center": goal.center.tolist(), "radius": goal.radius}}
    else:
        goal_doc = {"box": {"lo": goal.lo.tolist(), "hi": goal.hi.tolist()}}
    return {
        "dimension": 2,
        "outer": space.outer.tolist(),
        "holes": [h.tolist() for h in space.holes],
        "start": np.asarray(pm.start, float).tolist(),
        "goal": goal_doc,
    }


def save_map(pm: ProblemMap, path) -> None:
    with open(path, "w") as f:
        json.dump(map_to_dict(pm), f, indent=2, sort_keys=True)
        f.write("\n")


def load_map(path) -> ProblemMap:
    with open(path) as f:
        doc = json.load(f)
    if doc.get("dimension") != 2:
        raise ValueError("map files are two-dimensional")
    space = PolygonMap(np.asarray(doc["outer"], float),
                       holes=[np.asarray(h, float) for h in doc.get("holes", [])],
                       name="file")
    g = doc["goal"]
    if "ball" in g:
        goal = BallGoal(center=np.asarray(g["ball"]["center"], float),
                        radius=float(g["ball"]["radius"]))
    else:
        goal = BoxGoal(lo=np.asarray(g["box"]["lo"], float),
                       hi=np.asarray(g["box"]["hi"], float))
    return ProblemMap(space=space, start=np.asarray(doc["start"], float),
                      goal=goal, name="file")
