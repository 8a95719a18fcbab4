"""Scenario pipeline, seeded Monte-Carlo trials, coverage and experiment tables."""

from __future__ import annotations

import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

from tetherplan import config
from tetherplan.contact import advance_contacts, occupied_centers, plan_contact
from tetherplan.exceptions import (
    ContactUnresolvableError,
    InvalidEndpointError,
    InvalidReelError,
    UndefinedFractionError,
    ValidationError,
)
from tetherplan.executor import CrossTrackError, Trajectory, cross_track_error, simulate_execution
from tetherplan.files import check_scenario_bounds, find_scenario, load_scenario, plan_header, scenario_map_path
from tetherplan.models import (
    ExperimentRow,
    ExperimentTable,
    NoiseConfig,
    PlanHeader,
    PointLike,
    PRMParams,
    ReachabilityReport,
    ScenarioSpec,
    SimulationReport,
    TrialSummary,
    as_array,
)
from tetherplan.paths import AnnotatedPath
from tetherplan.prm import Roadmap, build_prm, densify_path, visible_vertices
from tetherplan.raycast import plan_raycast, reachability_fraction, reduce_reachable_space
from tetherplan.voxel_map import VoxelMap, inflate, is_free, load_map, resample, segments_collide

logger = logging.getLogger(__name__)

_ROOT = "root"
_FACE_STEPS = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]])
# Nearest tree vertices tried per cell before falling back to the lattice fill.
_NEAREST = 16


# Scenario pipeline


@dataclass(frozen=True)
class ScenarioMaps:
    spec: ScenarioSpec
    path: Path
    map_path: Path
    original: VoxelMap
    inflated: VoxelMap


@dataclass(frozen=True)
class PlannedScenario:
    maps: ScenarioMaps
    plan: AnnotatedPath
    header: PlanHeader

    @property
    def spec(self) -> ScenarioSpec:
        return self.maps.spec

    @property
    def label(self) -> str:
        return self.spec.experiment_class or self.spec.name


def load_scenario_maps(
    scenario: str | Path,
    *,
    resolution: float | None = None,
    inflate_radius: float | None = None,
) -> ScenarioMaps:
    """Load a scenario with its original and inflated maps.

    ``resolution`` re-grids the map; ``inflate_radius`` replaces the
    scenario's robot radius.
    """
    path = find_scenario(scenario)
    spec = load_scenario(path)
    map_path = scenario_map_path(path, spec)
    original = load_map(map_path)
    if resolution is not None:
        original = resample(original, resolution)
    check_scenario_bounds(spec, original)
    radius = spec.robot_radius if inflate_radius is None else inflate_radius
    return ScenarioMaps(spec=spec, path=path, map_path=map_path, original=original, inflated=inflate(original, radius))


def plan_scenario(maps: ScenarioMaps, *, seed: int | None = None) -> PlannedScenario:
    """Run the scenario's planner over start, mid-points and goal."""
    spec = maps.spec
    params = spec.prm if seed is None else spec.prm.model_copy(update={"seed": seed})
    planner = plan_raycast if spec.planner == "raycast" else plan_contact
    plan = planner(
        maps.inflated,
        maps.original,
        spec.reel,
        spec.start,
        spec.goal,
        params,
        mid_points=spec.mid_points,
        route=spec.route,
    )
    header = plan_header(
        plan,
        maps.original,
        spec.planner,
        map_ref=str(maps.map_path),
        inflate=maps.inflated.inflated_by,
        scenario=spec.name,
        experiment_class=spec.experiment_class,
    )
    logger.info("Planned scenario '%s' (%s): %d waypoints", spec.name, spec.planner, len(plan))
    return PlannedScenario(maps=maps, plan=plan, header=header)


# Monte-Carlo trials


@dataclass(frozen=True)
class TrialResult:
    seed: int
    trajectory: Trajectory
    error: CrossTrackError


def run_trials(
    plan: AnnotatedPath,
    map_original: VoxelMap,
    noise: NoiseConfig,
    trials: int,
    *,
    seed: int | None = None,
    r_acc: float = config.DEFAULT_R_ACC,
    speed: float = config.DEFAULT_SPEED,
    rate: float = config.DEFAULT_RATE,
    step_budget: int = config.DEFAULT_STEP_BUDGET,
    workers: int = 1,
) -> list[TrialResult]:
    """Simulate ``trials`` runs seeded ``seed, seed + 1, ...``.

    Each run owns its random streams, so results do not depend on
    ``workers``. They come back sorted by seed.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    base = noise.seed if seed is None else seed
    seeds = [base + n for n in range(trials)]

    def one(s: int) -> TrialResult:
        traj = simulate_execution(
            plan, map_original, noise.model_copy(update={"seed": s}), r_acc, speed, rate, step_budget
        )
        result = TrialResult(seed=s, trajectory=traj, error=cross_track_error(traj, plan))
        logger.debug("Trial seed=%d: %s, mean %.4f m", s, traj.outcome, result.error.mean)
        return result

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    logger.info("Ran %d trials (seeds %d..%d)", trials, seeds[0], seeds[-1])
    return sorted(results, key=lambda r: r.seed)


def pooled_stage_means(results: Sequence[TrialResult]) -> dict[int, float]:
    """Mean cross-track error per active-contact count over all samples of all trials."""
    if not results:
        return {}
    errors = np.concatenate([r.error.per_sample for r in results])
    active = np.concatenate([r.error.active_contacts for r in results])
    return {int(c): float(errors[active == c].mean()) for c in np.unique(active)}


def summarize_trials(
    results: Sequence[TrialResult],
    *,
    plan_ref: str,
    planner: str,
    experiment_class: str | None = None,
    trajectory_paths: Sequence[str] | None = None,
) -> SimulationReport:
    if not results:
        raise ValidationError("no trials to summarize")
    paths = list(trajectory_paths) if trajectory_paths is not None else [None] * len(results)
    trials = [
        TrialSummary(
            seed=r.seed,
            outcome=r.trajectory.outcome,
            samples=len(r.trajectory),
            duration=r.trajectory.duration,
            mean=r.error.mean,
            max=r.error.max,
            stage_means=r.error.stage_means,
            trajectory=p,
        )
        for r, p in zip(results, paths)
    ]
    return SimulationReport(
        plan=plan_ref,
        planner=planner,
        experiment_class=experiment_class,
        trials=trials,
        grand_mean=float(np.mean([t.mean for t in trials])),
        grand_max=float(max(t.max for t in trials)),
        per_contact_stage_means=pooled_stage_means(results),
    )


# Experiment classes


@dataclass(frozen=True)
class ClassRun:
    planned: PlannedScenario
    results: list[TrialResult]

    @property
    def label(self) -> str:
        return self.planned.label


@dataclass(frozen=True)
class ExperimentRun:
    table: ExperimentTable
    classes: list[ClassRun]


def run_experiment(
    scenarios: Sequence[str | Path] = config.EXPERIMENT_SCENARIOS,
    *,
    trials: int | None = None,
    seed: int = 0,
    noise: NoiseConfig | None = None,
    r_acc: float | None = None,
    resolution: float | None = None,
    inflate_radius: float | None = None,
    workers: int = 1,
) -> ExperimentRun:
    """Plan each scenario once and fly it ``trials`` times with seeds ``seed..``.

    Every class sees the same seeds. ``noise`` and ``r_acc`` replace the
    scenario values when given.
    """
    classes = []
    for scenario in scenarios:
        maps = load_scenario_maps(scenario, resolution=resolution, inflate_radius=inflate_radius)
        planned = plan_scenario(maps)
        spec = maps.spec
        results = run_trials(
            planned.plan,
            maps.original,
            noise if noise is not None else spec.noise,
            trials if trials is not None else spec.trials,
            seed=seed,
            r_acc=r_acc if r_acc is not None else spec.r_acc,
            speed=spec.speed,
            rate=spec.rate,
            workers=workers,
        )
        classes.append(ClassRun(planned=planned, results=results))

    rows = [
        ExperimentRow(
            label=c.label,
            scenario=c.planned.spec.name,
            trial_means=[r.error.mean for r in c.results],
            mean=float(np.mean([r.error.mean for r in c.results])),
        )
        for c in classes
    ]
    table = ExperimentTable(rows=rows, stage_means=pooled_stage_means([r for c in classes for r in c.results]))
    logger.info("Experiment table:\n%s", table.as_text())
    return ExperimentRun(table=table, classes=classes)


# Reachability and contact coverage


@dataclass(frozen=True, eq=False)
class Coverage:
    """Inflated-free cells whose contact-planned tether is valid."""

    free: np.ndarray
    covered: np.ndarray

    @property
    def total_cells(self) -> int:
        return int(self.free.sum())

    @property
    def covered_cells(self) -> int:
        return int(self.covered.sum())

    @property
    def fraction(self) -> float:
        if self.total_cells == 0:
            raise UndefinedFractionError("map has no free cells")
        return self.covered_cells / self.total_cells

    @property
    def uncovered(self) -> np.ndarray:
        return np.argwhere(self.free & ~self.covered)


def _walk(
    stack: list[np.ndarray],
    a: np.ndarray,
    b: np.ndarray,
    original: VoxelMap,
    centers: np.ndarray,
    step: float,
    levels: int = config.DEFAULT_REFINEMENT_LEVELS,
) -> list[np.ndarray] | None:
    """Stack after moving from a to b, or None if no contact can be placed."""
    for level in range(levels + 1):
        walked = list(stack)
        points = densify_path(np.array([a, b]), step / 2**level)
        try:
            for prev, q in zip(points[:-1], points[1:]):
                advance_contacts(walked, prev, q, original, centers)
        except ContactUnresolvableError:
            continue
        return walked
    return None


def _tether_valid(original: VoxelMap, stack: list[np.ndarray], p: np.ndarray) -> bool:
    polyline = np.vstack([*stack, p])
    return not segments_collide(original, polyline[:-1], polyline[1:]).any()


def contact_coverage(
    vmap: VoxelMap,
    original: VoxelMap,
    reel: PointLike,
    prm_params: PRMParams | None = None,
    *,
    start: PointLike | None = None,
    roadmap: Roadmap | None = None,
    step: float | None = None,
) -> Coverage:
    """Cells of ``vmap`` the contact planner reaches from ``start`` (default: the reel).

    Contact stacks are propagated down the shortest-path tree of the
    roadmap, then from each tree vertex to the cells that see it. Cells no
    tree vertex sees are filled from face-adjacent covered cells.

    Raises:
        UndefinedFractionError: If ``vmap`` has no free cell.
        InvalidReelError: If the reel is not free in ``original``.
        InvalidEndpointError: If ``start`` is not free in ``vmap``.
    """
    if vmap.free_count == 0:
        raise UndefinedFractionError("map has no free cells")
    reel = as_array(reel)
    start = reel if start is None else as_array(start)
    if not is_free(original, reel):
        raise InvalidReelError(f"reel {reel.tolist()} is occupied or outside the map")
    if not is_free(vmap, start):
        raise InvalidEndpointError(f"coverage start {start.tolist()} is not in free space")
    params = prm_params or PRMParams()
    step = step or vmap.resolution / 2
    roadmap = roadmap or build_prm(vmap, params.n_samples, params.k_neighbors, params.seed)
    centers = occupied_centers(original)

    graph = roadmap.graph.copy()
    graph.add_node(_ROOT)
    for v in visible_vertices(roadmap, vmap, start, params.connect_neighbors):
        graph.add_edge(_ROOT, v, weight=float(np.linalg.norm(roadmap.vertices[v] - start)))
    dist, paths = nx.single_source_dijkstra(graph, _ROOT)

    def position(node) -> np.ndarray:
        return start if node == _ROOT else roadmap.vertices[node]

    root_stack = _walk([reel], reel, start, original, centers, step)
    stacks: dict = {} if root_stack is None else {_ROOT: root_stack}
    for node in sorted(dist, key=dist.get):
        if node == _ROOT or paths[node][-2] not in stacks:
            continue
        parent = paths[node][-2]
        walked = _walk(stacks[parent], position(parent), position(node), original, centers, step)
        if walked is not None:
            stacks[node] = walked
    logger.info("Coverage tree: %d of %d roadmap vertices carry a contact stack", len(stacks), len(roadmap) + 1)

    free = ~vmap.grid
    covered = np.zeros(vmap.dims, dtype=bool)
    cell_stacks: dict[tuple[int, int, int], list[np.ndarray]] = {}
    cells = np.argwhere(free)
    cell_pts = vmap.centers(cells)

    nodes = list(stacks)
    if nodes:
        node_pts = np.array([position(n) for n in nodes])
        k = min(_NEAREST, len(nodes))
        _, idx = cKDTree(node_pts).query(cell_pts, k=k)
        idx = idx.reshape(len(cells), k)
        assigned = np.full(len(cells), -1)
        for j in range(k):
            pending = np.flatnonzero(assigned < 0)
            if len(pending) == 0:
                break
            sees = ~segments_collide(vmap, cell_pts[pending], node_pts[idx[pending, j]])
            assigned[pending[sees]] = idx[pending[sees], j]

        for n in np.unique(assigned[assigned >= 0]):
            stack = stacks[nodes[n]]
            members = np.flatnonzero(assigned == n)
            direct = ~segments_collide(original, stack[-1], cell_pts[members])
            for m, ok in zip(members, direct):
                cell = tuple(int(v) for v in cells[m])
                if ok:
                    covered[cell] = True
                    cell_stacks[cell] = stack
                    continue
                walked = _walk(stack, node_pts[n], cell_pts[m], original, centers, step)
                if walked is not None and _tether_valid(original, walked, cell_pts[m]):
                    covered[cell] = True
                    cell_stacks[cell] = walked

    from_tree = int(covered.sum())
    queue = deque(cell_stacks)
    dims = np.array(vmap.dims)
    while queue:
        cell = queue.popleft()
        here = vmap.center(cell)
        for nb in np.array(cell) + _FACE_STEPS:
            if np.any(nb < 0) or np.any(nb >= dims):
                continue
            nb_t = tuple(int(v) for v in nb)
            if covered[nb_t] or not free[nb_t]:
                continue
            there = vmap.center(nb_t)
            walked = _walk(cell_stacks[cell], here, there, original, centers, step)
            if walked is not None and _tether_valid(original, walked, there):
                covered[nb_t] = True
                cell_stacks[nb_t] = walked
                queue.append(nb_t)

    result = Coverage(free=free, covered=covered)
    logger.info(
        "Contact coverage: %d/%d cells (%d from roadmap tree, %d by lattice fill)",
        result.covered_cells,
        result.total_cells,
        from_tree,
        result.covered_cells - from_tree,
    )
    return result


def reachability_report(
    vmap: VoxelMap,
    original: VoxelMap,
    reel: PointLike,
    *,
    map_ref: str,
    coverage: bool = True,
    prm_params: PRMParams | None = None,
) -> ReachabilityReport:
    """Reachable share of the inflated free space for both planners.

    Raises:
        UndefinedFractionError: If ``vmap`` has no free cell.
        InvalidReelError: If the reel is occupied or outside the map.
    """
    if vmap.free_count == 0:
        raise UndefinedFractionError("map has no free cells")
    reduced = reduce_reachable_space(vmap, original, reel)
    report = ReachabilityReport(
        map=map_ref,
        reel=as_array(reel).tolist(),
        inflate=vmap.inflated_by,
        free_cells=reduced.free_cells,
        blocked_cells=reduced.blocked_cells,
        fraction=reachability_fraction(reduced),
    )
    if coverage:
        cov = contact_coverage(vmap, original, reel, prm_params)
        report = report.model_copy(update={"contact_covered": cov.covered_cells, "contact_fraction": cov.fraction})
    return report
