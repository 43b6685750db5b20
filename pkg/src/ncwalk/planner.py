"""Position-only planners: RRT and the Hit-and-Run chain run to the goal.

Both planners count transitions the same way: one proposal iteration (a
uniform sample plus extension attempt for RRT, one chain step for
Hit-and-Run). Rejection draws consumed by the uniform sampler are recorded
separately so alternative accountings can be recomputed from the output.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import FreeSpace, GoalRegion, RejectionBudgetError
from .sampler import ensure_rng, random_direction


def uniform_point(space: FreeSpace, rng, max_tries: int = 100000) -> np.ndarray:
    """Uniform sample on the space via rejection from its bounding box."""
    rng = ensure_rng(rng)
    lo, hi = space.bounding_box()
    for _ in range(max_tries):
        p = lo + (hi - lo) * rng.random(space.dimension)
        if space.contains(p):
            return p
    raise RejectionBudgetError(
        f"no point accepted in {max_tries} draws; free-space fraction too small"
    )


class _Sampler:
    """Uniform sampler that also counts raw rejection draws."""

    def __init__(self, space: FreeSpace, rng, max_tries: int = 100000):
        self.space = space
        self.rng = rng
        self.lo, self.hi = space.bounding_box()
        self.max_tries = max_tries
        self.draws = 0

    def __call__(self) -> np.ndarray:
        for _ in range(self.max_tries):
            p = self.lo + (self.hi - self.lo) * self.rng.random(self.space.dimension)
            self.draws += 1
            if self.space.contains(p):
                return p
        raise RejectionBudgetError(
            f"no point accepted in {self.max_tries} draws; free-space fraction too small"
        )


class RrtTree:
    """Rooted tree of states; every edge [parent, child] is a visible segment."""

    def __init__(self, root, dim: int | None = None):
        root = np.asarray(root, dtype=float)
        dim = root.shape[0] if dim is None else dim
        self._buf = np.empty((256, dim))
        self._buf[0] = root
        self.size = 1
        self.parent = [-1]
        self.iterations_used = 0

    @property
    def nodes(self) -> np.ndarray:
        return self._buf[: self.size]

    def add(self, point, parent: int) -> int:
        if self.size == self._buf.shape[0]:
            self._buf = np.concatenate([self._buf, np.empty_like(self._buf)])
        self._buf[self.size] = point
        self.parent.append(parent)
        self.size += 1
        return self.size - 1

    def nearest(self, q) -> int:
        d = self.nodes - np.asarray(q, dtype=float)
        return int(np.argmin(np.einsum("ij,ij->i", d, d)))

    def path_to(self, idx: int) -> np.ndarray:
        chain = []
        while idx >= 0:
            chain.append(self.nodes[idx])
            idx = self.parent[idx]
        return np.array(chain[::-1])


@dataclass
class PlanResult:
    """Outcome of one planner run.

    `path` holds the returned state sequence (rows); for kinematic planners
    the rows are position ++ velocity and `stops` flags boundary stops.
    """

    path: np.ndarray
    transitions: int
    success: bool
    wall_time: float
    seed: int | None = None
    node_count: int = 0
    draws: int = 0
    stops: np.ndarray | None = None

    def path_length(self, ndim: int | None = None) -> float:
        pts = self.path if ndim is None else self.path[:, :ndim]
        if len(pts) < 2:
            return 0.0
        return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def rrt_extend(space: FreeSpace, tree: RrtTree, target):
    """One RRT extension toward `target`.

    The nearest node extends to the target when visible, otherwise to the
    farthest point of the segment still inside the space. Immediately
    blocked (zero-length) extensions add nothing and return None.
    """
    target = np.asarray(target, dtype=float)
    ni = tree.nearest(target)
    a = tree.nodes[ni]
    t = space.first_exit(a, target)
    if t <= 0.0:
        return None
    new = a + t * (target - a)
    if float(np.linalg.norm(new - a)) < 1e-12:
        return None
    return tree.add(new, ni)


def rrt_plan(space: FreeSpace, start, goal: GoalRegion, max_iters: int,
             rng) -> tuple[PlanResult, RrtTree]:
    """Grow an RRT from `start` until a newly added node lands in the goal."""
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = ensure_rng(rng)
    start = np.asarray(start, dtype=float)
    if not space.contains(start):
        raise ValueError("planner start lies outside the free space")
    t0 = time.perf_counter()
    tree = RrtTree(start)
    if goal.contains(start):
        return (
            PlanResult(path=start[None, :], transitions=0, success=True,
                       wall_time=time.perf_counter() - t0, seed=seed, node_count=1),
            tree,
        )
    sample = _Sampler(space, rng)
    for it in range(1, max_iters + 1):
        tree.iterations_used = it
        idx = rrt_extend(space, tree, sample())
        if idx is not None and goal.contains(tree.nodes[idx]):
            return (
                PlanResult(path=tree.path_to(idx), transitions=it, success=True,
                           wall_time=time.perf_counter() - t0, seed=seed,
                           node_count=tree.size, draws=sample.draws),
                tree,
            )
    return (
        PlanResult(path=tree.path_to(0), transitions=max_iters, success=False,
                   wall_time=time.perf_counter() - t0, seed=seed,
                   node_count=tree.size, draws=sample.draws),
        tree,
    )


def hnr_plan(space: FreeSpace, start, goal: GoalRegion, max_steps: int, rng) -> PlanResult:
    """Run the Hit-and-Run chain from `start` until it enters the goal region.

    The returned path is the full chain prefix; Hit-and-Run does no pruning.
    """
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = ensure_rng(rng)
    u = np.asarray(start, dtype=float)
    if not space.contains(u):
        raise ValueError("planner start lies outside the free space")
    t0 = time.perf_counter()
    n = space.dimension
    states = [u.copy()]
    if goal.contains(u):
        return PlanResult(path=np.array(states), transitions=0, success=True,
                          wall_time=time.perf_counter() - t0, seed=seed, node_count=1)
    for step in range(1, max_steps + 1):
        d = random_direction(n, rng)
        lo, hi = space.chord_span(u, d)
        u = u + (lo + (hi - lo) * rng.random()) * d
        states.append(u.copy())
        if goal.contains(u):
            return PlanResult(path=np.array(states), transitions=step, success=True,
                              wall_time=time.perf_counter() - t0, seed=seed,
                              node_count=len(states))
    return PlanResult(path=np.array(states), transitions=max_steps, success=False,
                      wall_time=time.perf_counter() - t0, seed=seed,
                      node_count=len(states))


RESULT_FIELDS = ["algorithm", "map", "width", "seed", "success", "transitions",
                 "nodes", "path_length", "wall_time_ms"]


def result_row(algorithm: str, map_name: str, width: float, result: PlanResult,
               ndim: int | None = None, include_timing: bool = False) -> list:
    wall_ms = result.wall_time * 1000.0 if include_timing else 0.0
    return [
        algorithm,
        map_name,
        f"{width:g}",
        result.seed if result.seed is not None else "",
        int(result.success),
        result.transitions,
        result.node_count,
        f"{result.path_length(ndim):.6f}",
        f"{wall_ms:.3f}",
    ]


def write_results_csv(rows: list[list], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(RESULT_FIELDS)
        w.writerows(rows)
