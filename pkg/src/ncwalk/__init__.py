"""Geometric sampling and planning on non-convex free spaces.

Hit-and-Run random walks and RRT planning over polygon, box, ball and
implicit free spaces, plus the analysis layer: cross-ratio distances,
conductance and mixing-time bounds, and Monte-Carlo checkers for the
inequalities they rest on.
"""

from .geometry import (
    Ball,
    BallGoal,
    Box,
    BoxGoal,
    Chord,
    FreeSpace,
    ImplicitSpace,
    MapSpec,
    PolygonMap,
    ProblemMap,
    ball_map,
    box_map,
    corridor_map,
    dumbbell_map,
    generate_map,
    load_map,
    save_map,
    spiral_map,
)
from .sampler import (
    ChainTrace,
    ProposalSample,
    ensure_rng,
    hnr_chain,
    hnr_step,
    invisible_mass,
    occupancy_tv,
    proposal_density,
    proposal_tv,
    random_direction,
    step_quantile,
    write_trace_csv,
)
from .planner import (
    PlanResult,
    RrtTree,
    hnr_plan,
    rrt_extend,
    rrt_plan,
    uniform_point,
    write_results_csv,
)
from .dynamics import (
    KinoConfig,
    KinoState,
    best_control,
    kino_hnr_plan,
    kino_propose_hnr,
    kino_rrt_plan,
    propagate,
    write_kino_trace_csv,
)
from .metrics import (
    BoundBreakdown,
    CheckReport,
    ConstantsProfile,
    CrossRatioSample,
    ball_chord_ratio_exact,
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
    unit_ball_volume,
)
from .bench import ExperimentSpec, RunRecord, emit_report, run_sweep

__version__ = "0.1.0"
