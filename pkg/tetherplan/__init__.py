"""tetherplan - tether-aware 3-D motion planning for a tethered aerial robot.

Example:
    >>> from tetherplan import load_map, inflate, plan_contact, simulate_execution, cross_track_error, NoiseConfig
    >>>
    >>> original = load_map("tetherplan/scenarios/maps/lab_room.json")
    >>> inflated = inflate(original, 0.3)
    >>> plan = plan_contact(inflated, original, reel=(1.65, 0.05, 0.25),
    ...                     start=(0.4, 1.5, 0.4), goal=(2.9, 1.5, 2.9))
    >>> print(len(plan.events), "contact events")
    >>>
    >>> # Fly it once with default noise
    >>> traj = simulate_execution(plan, original, NoiseConfig(seed=1))
    >>> print(cross_track_error(traj, plan).mean)

Straight-tether example:
    >>> from tetherplan import plan_raycast, reduce_reachable_space, reachability_fraction
    >>>
    >>> reduced = reduce_reachable_space(inflated, original, (1.65, 0.05, 0.25))
    >>> print(reachability_fraction(reduced))
"""

from tetherplan.contact import (
    ContactPlan,
    find_contact_point,
    obstacle_confined,
    plan_contact,
    plan_contacts,
    plan_contacts_refined,
    tether_violations,
)
from tetherplan.exceptions import (
    ContactPreconditionError,
    ContactUnresolvableError,
    InvalidEndpointError,
    InvalidReelError,
    MapFormatError,
    NoFreeSpaceError,
    NoPathError,
    PlanFormatError,
    PlanningError,
    SamplingExhaustedError,
    ScenarioError,
    TetherBlockedEndpointError,
    TetherPlanError,
    UndefinedFractionError,
    ValidationError,
)
from tetherplan.executor import (
    ContactStack,
    Controls,
    CrossTrackError,
    Trajectory,
    cross_track_error,
    desired_controls,
    from_polar,
    simulate_execution,
    static_length,
    to_polar,
)
from tetherplan.experiments import contact_coverage, reachability_report, run_experiment, run_trials
from tetherplan.models import (
    CellIndex,
    ContactEvent,
    NoiseConfig,
    PlanHeader,
    Point3,
    PRMParams,
    ScenarioSpec,
)
from tetherplan.paths import AnnotatedPath
from tetherplan.prm import Roadmap, build_prm, densify_path, path_is_valid, query_path, smooth_path
from tetherplan.raycast import ReducedMap, plan_raycast, reachability_fraction, reduce_reachable_space
from tetherplan.voxel_map import VoxelMap, inflate, is_free, load_map, segment_collides

__version__ = "0.1.0"

__all__ = [
    # Maps
    "VoxelMap",
    "load_map",
    "inflate",
    "is_free",
    "segment_collides",
    # Roadmap
    "Roadmap",
    "build_prm",
    "query_path",
    "smooth_path",
    "densify_path",
    "path_is_valid",
    # Planners
    "AnnotatedPath",
    "ReducedMap",
    "reduce_reachable_space",
    "reachability_fraction",
    "plan_raycast",
    "ContactPlan",
    "obstacle_confined",
    "find_contact_point",
    "plan_contacts",
    "plan_contacts_refined",
    "plan_contact",
    "tether_violations",
    # Executor
    "Controls",
    "ContactStack",
    "Trajectory",
    "CrossTrackError",
    "to_polar",
    "from_polar",
    "static_length",
    "desired_controls",
    "simulate_execution",
    "cross_track_error",
    # Experiments
    "run_trials",
    "run_experiment",
    "contact_coverage",
    "reachability_report",
    # Models
    "Point3",
    "CellIndex",
    "PRMParams",
    "NoiseConfig",
    "ScenarioSpec",
    "PlanHeader",
    "ContactEvent",
    # Exceptions
    "TetherPlanError",
    "ValidationError",
    "MapFormatError",
    "PlanFormatError",
    "ScenarioError",
    "InvalidEndpointError",
    "InvalidReelError",
    "ContactPreconditionError",
    "UndefinedFractionError",
    "PlanningError",
    "NoFreeSpaceError",
    "SamplingExhaustedError",
    "NoPathError",
    "TetherBlockedEndpointError",
    "ContactUnresolvableError",
]
