"""Tether-reduced reachable space and the straight-tether planner.

A free cell is reachable with a straight tether iff the segment from the reel
to its center does not touch an obstacle of the original map.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import ndimage

from tetherplan.exceptions import (
    InvalidEndpointError,
    InvalidReelError,
    TetherBlockedEndpointError,
    UndefinedFractionError,
    ValidationError,
)
from tetherplan.models import CellIndex, PointLike, PRMParams, as_array, as_points
from tetherplan.paths import AnnotatedPath
from tetherplan.prm import Roadmap, build_prm, densify_path, path_is_valid, plan_route
from tetherplan.voxel_map import VoxelMap, is_free, segments_collide

logger = logging.getLogger(__name__)

_NEIGHBORHOOD_26 = np.ones((3, 3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class ReducedMap:
    """Inflated map plus the free cells a straight tether cannot reach."""

    base: VoxelMap
    original: VoxelMap
    reel: np.ndarray
    blocked: np.ndarray

    @property
    def blocked_by_tether(self) -> frozenset[CellIndex]:
        return frozenset(CellIndex(*(int(v) for v in c)) for c in np.argwhere(self.blocked))

    @property
    def free_cells(self) -> int:
        return self.base.free_count

    @property
    def blocked_cells(self) -> int:
        return int(self.blocked.sum())

    def as_map(self) -> VoxelMap:
        """The reduced space as a map: inflated obstacles plus tether-blocked cells."""
        return self.base.with_grid(self.base.grid | self.blocked)

    @cached_property
    def margin(self) -> np.ndarray:
        """Cells within one 26-neighborhood step of a cell whose center the reel cannot see.

        Evaluated on a grid padded by one cell so shadow just outside the map
        still marks its in-map neighbors.
        """
        dims = np.array(self.base.dims)
        padded = np.stack(
            np.meshgrid(*(np.arange(-1, n + 1) for n in dims), indexing="ij"), axis=-1
        ).reshape(-1, 3)
        hidden = segments_collide(self.original, self.reel, self.base.centers(padded))
        hidden = hidden.reshape(tuple(dims + 2))
        return ndimage.binary_dilation(hidden, structure=_NEIGHBORHOOD_26)[1:-1, 1:-1, 1:-1]

    def planning_map(self) -> VoxelMap:
        """Map the straight-tether planner searches in.

        Excluding the shadow margin keeps every point along a path, not only
        cell centers, in sight of the reel.
        """
        return self.base.with_grid(self.base.grid | self.blocked | self.margin)


def reduce_reachable_space(vmap: VoxelMap, original: VoxelMap, reel: PointLike) -> ReducedMap:
    """Mark free cells of ``vmap`` whose center the reel cannot see past ``original``.

    Raises:
        InvalidReelError: If the reel is outside the map or not free in ``vmap``.
    """
    reel = as_array(reel)
    if vmap.dims != original.dims or vmap.resolution != original.resolution or not np.allclose(
        vmap.origin, original.origin
    ):
        raise ValidationError("inflated and original maps must share geometry")
    if not is_free(vmap, reel):
        raise InvalidReelError(f"reel {reel.tolist()} is occupied or outside the map")

    free = np.argwhere(~vmap.grid)
    hidden = segments_collide(original, reel, vmap.centers(free))
    blocked = np.zeros(vmap.dims, dtype=bool)
    blocked[tuple(free[hidden].T)] = True
    blocked[vmap.cell_of(reel)] = False
    blocked.setflags(write=False)

    logger.info("Ray casting from %s: %d of %d free cells blocked", reel.tolist(), int(hidden.sum()), len(free))
    return ReducedMap(base=vmap, original=original, reel=reel, blocked=blocked)


def reachability_fraction(reduced: ReducedMap) -> float:
    """Share of free cells reachable with a straight tether."""
    free = reduced.free_cells
    if free == 0:
        raise UndefinedFractionError("map has no free cells")
    return (free - reduced.blocked_cells) / free


def check_raycast_endpoint(reduced: ReducedMap, p: PointLike, label: str) -> None:
    """Raise if p cannot start or end a straight-tether path."""
    p = as_array(p)
    if not is_free(reduced.base, p):
        raise InvalidEndpointError(f"{label} {p.tolist()} is not in free space")
    cell = reduced.base.cell_of(p)
    if reduced.blocked[cell]:
        raise TetherBlockedEndpointError(f"{label} {p.tolist()} lies in the tether shadow")
    if reduced.margin[cell]:
        raise TetherBlockedEndpointError(f"{label} {p.tolist()} lies at the edge of the tether shadow")


def plan_raycast(
    vmap: VoxelMap,
    original: VoxelMap,
    reel: PointLike,
    start: PointLike,
    goal: PointLike,
    prm_params: PRMParams | None = None,
    *,
    mid_points: Sequence[PointLike] = (),
    route: Sequence[PointLike] | None = None,
    roadmap: Roadmap | None = None,
    reduced: ReducedMap | None = None,
) -> AnnotatedPath:
    """Plan in the reduced space; every waypoint's contact is the reel.

    ``roadmap`` must have been built on ``reduced.planning_map()``. A fixed
    ``route`` replaces the roadmap query and is only densified.

    Raises:
        InvalidEndpointError: If an endpoint is occupied.
        TetherBlockedEndpointError: If an endpoint has no straight tether.
        NoPathError: If the reduced space does not connect the endpoints.
    """
    params = prm_params or PRMParams()
    reduced = reduced or reduce_reachable_space(vmap, original, reel)
    stops = [as_array(start), *(as_array(p) for p in mid_points), as_array(goal)]
    for n, p in enumerate(stops):
        label = "start" if n == 0 else "goal" if n == len(stops) - 1 else f"mid point {n}"
        check_raycast_endpoint(reduced, p, label)

    planning = reduced.planning_map()
    if route is not None:
        path = densify_path(as_points(route), params.step_max)
        if not path_is_valid(planning, path):
            raise ValidationError("route leaves the straight-tether reachable space")
    else:
        roadmap = roadmap or build_prm(planning, params.n_samples, params.k_neighbors, params.seed)
        path = plan_route(roadmap, planning, stops, params)

    logger.info("Ray-cast plan: %d waypoints", len(path))
    return AnnotatedPath.straight(path, reduced.reel)
