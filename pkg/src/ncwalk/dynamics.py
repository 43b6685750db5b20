"""Double-integrator planning with inelastic boundary stops.

States carry position and velocity. One control step applies an
acceleration from the unit ball over dt with exact quadratic kinematics;
if the position arc leaves the free space, the state halts at the first
boundary crossing and the velocity is zeroed. Both planners share one
controller (closed-form best acceleration toward a target state) and
differ only in how targets are proposed.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .geometry import EPS_IMPLICIT, FreeSpace, GoalRegion
from .planner import PlanResult, _Sampler
from .sampler import ensure_rng, random_direction

ARC_SAMPLES = 32  # arc points checked per propagation step


@dataclass(frozen=True)
class KinoState:
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))

    def packed(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity])


@dataclass(frozen=True)
class KinoConfig:
    """Integration step, speed cap, metric weight and tracking depths.

    The chain rides each proposal while the gap to it shrinks (up to k_max
    sub-steps, the kinematic analog of jumping to the sampled chord point);
    the tree variant extends by rrt_steps local controller steps per
    proposal, the small-local-step discipline of tree search under dynamics.
    """

    dt: float = 1.0
    v_max: float = 2.0
    lam: float = 1.0
    k_max: int = 50
    rrt_steps: int = 1

    def __post_init__(self):
        if self.dt <= 0 or self.v_max <= 0 or self.lam < 0 or self.k_max < 1 \
                or self.rrt_steps < 1:
            raise ValueError("invalid kinematic configuration")


def kino_metric(a: KinoState, b: KinoState, lam: float) -> float:
    dp = a.position - b.position
    dv = a.velocity - b.velocity
    return float(np.sqrt(dp @ dp + lam * (dv @ dv)))


def propagate(space: FreeSpace, s: KinoState, accel, cfg: KinoConfig) -> tuple[KinoState, bool]:
    """One exact double-integrator step; returns (state, stopped).

    p' = p + v dt + a dt^2/2 and v' = v + a dt clipped radially to v_max.
    If the quadratic position arc exits the space, the state stops at the
    first crossing (32-point arc scan plus bisection) with zero velocity.
    """
    a = np.asarray(accel, dtype=float)
    if np.linalg.norm(a) > 1.0 + 1e-9:
        raise ValueError("acceleration must lie in the unit ball")
    dt = cfg.dt
    p, v = s.position, s.velocity
    taus = np.linspace(0.0, dt, ARC_SAMPLES + 1)
    arc = p[None, :] + taus[:, None] * v[None, :] + 0.5 * taus[:, None] ** 2 * a[None, :]
    inside = space.contains_many(arc)
    if inside.all():
        v_new = v + a * dt
        speed = np.linalg.norm(v_new)
        if speed > cfg.v_max:
            v_new = v_new * (cfg.v_max / speed)
        return KinoState(position=arc[-1], velocity=v_new), False
    j = int(np.nonzero(~inside)[0][0])
    lo = 0.0 if j == 0 else taus[j - 1]
    hi = taus[j]
    while hi - lo > EPS_IMPLICIT:
        mid = 0.5 * (lo + hi)
        if space.contains(p + mid * v + 0.5 * mid * mid * a):
            lo = mid
        else:
            hi = mid
    stop_p = p + lo * v + 0.5 * lo * lo * a
    return KinoState(position=stop_p, velocity=np.zeros_like(v)), True


def best_control(s: KinoState, target: KinoState, cfg: KinoConfig) -> np.ndarray:
    """Acceleration in the unit ball minimizing the next-step gap to `target`.

    The cost |p + v dt + a dt^2/2 - p*|^2 + lam |v + a dt - v*|^2 is an
    isotropic quadratic in a, so the constrained optimum is the unconstrained
    minimizer projected radially onto the unit ball.
    """
    dt = cfg.dt
    alpha = 0.5 * dt * dt
    beta = dt
    c1 = s.position + s.velocity * dt - target.position
    c2 = s.velocity - target.velocity
    a = -(alpha * c1 + cfg.lam * beta * c2) / (alpha * alpha + cfg.lam * beta * beta)
    norm = np.linalg.norm(a)
    if norm > 1.0:
        a = a / norm
    return a


def _track(space: FreeSpace, s: KinoState, target: KinoState, cfg: KinoConfig,
           depth: int | None = None):
    """Steer toward `target` while the state metric strictly decreases.

    Stops after a boundary halt, a non-improving step (discarded), or `depth`
    sub-steps (default cfg.k_max). Returns (final state, executed states,
    stop flags).
    """
    cur = s
    gap = kino_metric(cur, target, cfg.lam)
    states, stops = [], []
    for _ in range(cfg.k_max if depth is None else depth):
        a = best_control(cur, target, cfg)
        nxt, stopped = propagate(space, cur, a, cfg)
        if stopped:
            cur = nxt
            states.append(nxt)
            stops.append(True)
            break
        new_gap = kino_metric(nxt, target, cfg.lam)
        if new_gap >= gap:
            break
        cur, gap = nxt, new_gap
        states.append(nxt)
        stops.append(False)
    return cur, states, stops


def kino_propose_hnr(space: FreeSpace, s: KinoState, cfg: KinoConfig, rng):
    """One kinematic Hit-and-Run proposal: chord target, then tracked motion.

    The desired position is one chord step from the current position; the
    desired speed is sampled uniformly up to v_max and aims along the motion
    toward that position. The controller tracks the target state while the
    gap shrinks. Returns (new state, executed states, stop flags); one
    proposal = one transition.
    """
    rng = ensure_rng(rng)
    n = space.dimension
    d = random_direction(n, rng)
    lo, hi = space.chord_span(s.position, d)
    p_star = s.position + (lo + (hi - lo) * rng.random()) * d
    speed = cfg.v_max * rng.random()
    gap = p_star - s.position
    nrm = float(np.linalg.norm(gap))
    v_star = speed * gap / nrm if nrm > 1e-12 else np.zeros(n)
    target = KinoState(position=p_star, velocity=v_star)
    return _track(space, s, target, cfg)


def _finish(path_states, stop_flags, transitions, success, t0, seed):
    packed = np.array([st.packed() for st in path_states])
    return PlanResult(path=packed, transitions=transitions, success=success,
                      wall_time=time.perf_counter() - t0, seed=seed,
                      node_count=len(path_states),
                      stops=np.array(stop_flags, dtype=bool))


def kino_hnr_plan(space: FreeSpace, start: KinoState, goal: GoalRegion,
                  cfg: KinoConfig, max_transitions: int, rng) -> PlanResult:
    """Kinematic Hit-and-Run: iterate chord proposals until the goal position."""
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = ensure_rng(rng)
    if not space.contains(start.position):
        raise ValueError("planner start lies outside the free space")
    t0 = time.perf_counter()
    cur = start
    path = [start]
    stops = [False]
    if goal.contains(start.position):
        return _finish(path, stops, 0, True, t0, seed)
    for step in range(1, max_transitions + 1):
        cur, states, flags = kino_propose_hnr(space, cur, cfg, rng)
        path.extend(states)
        stops.extend(flags)
        if goal.contains(cur.position):
            return _finish(path, stops, step, True, t0, seed)
    return _finish(path, stops, max_transitions, False, t0, seed)


def kino_rrt_plan(space: FreeSpace, start: KinoState, goal: GoalRegion,
                  cfg: KinoConfig, max_transitions: int, rng) -> PlanResult:
    """Kinematic RRT: steer the metric-nearest tree state toward sampled targets.

    Targets pair a uniform free-space position with a sampled desired speed
    along a random heading; each proposal extends the nearest state by
    cfg.rrt_steps local controller steps. The tree stores reached states with
    their sub-step trajectories so the full motion history can be replayed.
    """
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = ensure_rng(rng)
    if not space.contains(start.position):
        raise ValueError("planner start lies outside the free space")
    t0 = time.perf_counter()
    if goal.contains(start.position):
        return _finish([start], [False], 0, True, t0, seed)
    n = space.dimension
    nodes = [start]
    packed = np.array([start.packed()])
    parent = [-1]
    segments: list[tuple[list[KinoState], list[bool]]] = [([], [])]
    sample = _Sampler(space, rng)
    lam = cfg.lam

    def nearest(target: KinoState) -> int:
        dp = packed[:, :n] - target.position
        dv = packed[:, n:] - target.velocity
        return int(np.argmin(np.einsum("ij,ij->i", dp, dp)
                             + lam * np.einsum("ij,ij->i", dv, dv)))

    for it in range(1, max_transitions + 1):
        p_star = sample()
        heading = random_direction(n, rng)
        v_star = cfg.v_max * rng.random() * heading
        target = KinoState(position=p_star, velocity=v_star)
        ni = nearest(target)
        reached, states, flags = _track(space, nodes[ni], target, cfg,
                                        depth=cfg.rrt_steps)
        if not states:
            continue
        nodes.append(reached)
        packed = np.vstack([packed, reached.packed()])
        parent.append(ni)
        segments.append((states, flags))
        if goal.contains(reached.position):
            # stitch the root-to-goal branch from stored sub-step segments
            idx = len(nodes) - 1
            chain_states: list[KinoState] = []
            chain_flags: list[bool] = []
            while idx >= 0:
                seg_states, seg_flags = segments[idx]
                chain_states = list(seg_states) + chain_states
                chain_flags = list(seg_flags) + chain_flags
                idx = parent[idx]
            chain_states = [start] + chain_states
            chain_flags = [False] + chain_flags
            res = _finish(chain_states, chain_flags, it, True, t0, seed)
            res.draws = sample.draws
            return res
    res = _finish([start], [False], max_transitions, False, t0, seed)
    res.node_count = len(nodes)
    res.draws = sample.draws
    return res


def write_kino_trace_csv(result: PlanResult, path) -> None:
    """CSV export: step,px,py,vx,vy,stopped per executed state."""
    stops = result.stops if result.stops is not None else np.zeros(len(result.path), bool)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "px", "py", "vx", "vy", "stopped"])
        for k, (row, st) in enumerate(zip(result.path, stops)):
            w.writerow([k] + [f"{x:.17g}" for x in row] + [int(st)])
