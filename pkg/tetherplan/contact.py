"""Contact-point planning and relaxation over a smoothed path.

The planner walks the waypoints once with a stack of tether contacts whose
bottom is the tether origin. At each waypoint it first tries to relax the top
contact, then, if the top contact cannot see the waypoint, pushes a new one
found on an obstacle corner. Tether checks run against the original map;
waypoints live in the inflated map.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from itertools import product
from typing import Sequence

import numpy as np

from tetherplan import config
from tetherplan.exceptions import (
    ContactPreconditionError,
    ContactUnresolvableError,
    InvalidEndpointError,
    InvalidReelError,
    ValidationError,
)
from tetherplan.models import ContactEvent, Point3, PointLike, PRMParams, as_array, as_points
from tetherplan.paths import AnnotatedPath
from tetherplan.prm import Roadmap, build_prm, densify_path, path_is_valid, plan_route
from tetherplan.voxel_map import (
    VoxelMap,
    is_free,
    occupied_cells_touched,
    segment_collides,
    segments_collide,
)

logger = logging.getLogger(__name__)

# Projection planes as (first axis, second axis): xy, yz, xz.
PROJECTION_PLANES = ((0, 1), (1, 2), (0, 2))

_CORNERS = np.array(list(product((0, 1), repeat=3)), dtype=np.int64)
# Projected areas below this count as degenerate.
_AREA_EPS = 1e-12


@dataclass(frozen=True)
class ContactPlan(AnnotatedPath):
    """Annotated path produced by the contact planner, with its event log."""

    refinement_level: int = 0

    @property
    def max_depth(self) -> int:
        """Deepest stack reached, counting the tether origin."""
        return max((e.depth for e in self.events), default=1)

    @property
    def final_stack(self) -> np.ndarray:
        return self.contact_stack_at(len(self) - 1)


def occupied_centers(vmap: VoxelMap) -> np.ndarray:
    return vmap.centers(np.argwhere(vmap.grid))


def _cross2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def obstacle_confined(
    a: PointLike,
    b: PointLike,
    c: PointLike,
    vmap: VoxelMap,
    centers: np.ndarray | None = None,
) -> bool:
    """True iff some occupied cell center lies strictly inside triangle abc in
    the xy, yz and xz projections at once.

    A projection with zero area confines nothing, so any degenerate plane
    makes the result False. ``centers`` may pass precomputed occupied cell
    centers of ``vmap``.
    """
    pts = occupied_centers(vmap) if centers is None else centers
    if len(pts) == 0:
        return False
    tri = np.stack([as_array(a), as_array(b), as_array(c)])
    inside = np.ones(len(pts), dtype=bool)
    for u, v in PROJECTION_PLANES:
        pa, pb, pc = tri[:, [u, v]]
        area = float(_cross2(pb - pa, pc - pa))
        if abs(area) <= _AREA_EPS:
            return False
        q = pts[:, [u, v]]
        s = math.copysign(1.0, area)
        inside &= s * _cross2(pb - pa, q - pa) > 0
        inside &= s * _cross2(pc - pb, q - pb) > 0
        inside &= s * _cross2(pa - pc, q - pc) > 0
        if not inside.any():
            return False
    return True


def find_contact_point(
    stack_top: PointLike,
    wp_visible: PointLike,
    wp_blocked: PointLike,
    vmap: VoxelMap,
) -> np.ndarray:
    """Place a new contact on an obstacle corner between two waypoints.

    Candidates are the corners of every occupied cell touched by tether rays
    from ``stack_top`` to points between ``wp_visible`` and ``wp_blocked``,
    each pushed outward along its cell diagonal by resolution / 100. The
    free candidate that sees both ``stack_top`` and ``wp_blocked`` with the
    shortest total tether wins.

    Raises:
        ContactPreconditionError: If ``wp_visible`` is hidden from ``stack_top``
            or ``wp_blocked`` is not.
        ContactUnresolvableError: If no candidate restores line of sight.
    """
    top, seen, hidden = as_array(stack_top), as_array(wp_visible), as_array(wp_blocked)
    if segment_collides(vmap, top, seen):
        raise ContactPreconditionError(f"{seen.tolist()} is not visible from contact {top.tolist()}")
    if not segment_collides(vmap, top, hidden):
        raise ContactPreconditionError(f"{hidden.tolist()} is already visible from contact {top.tolist()}")

    span = float(np.linalg.norm(hidden - seen))
    n = max(2, math.ceil(span / (vmap.resolution / 4)) + 1)
    sweep = seen + np.linspace(0.0, 1.0, n)[:, None] * (hidden - seen)
    cells = occupied_cells_touched(vmap, top, sweep)

    corners = (cells[:, None, :] + _CORNERS[None, :, :]).reshape(-1, 3)
    outward = np.tile(2 * _CORNERS - 1, (len(cells), 1))
    eps = vmap.resolution / 100
    candidates = np.unique(vmap.origin + corners * vmap.resolution + eps * outward, axis=0)
    candidates = candidates[vmap.free_mask(candidates)]
    candidates = candidates[np.linalg.norm(candidates - top, axis=1) > 1e-12]

    ok = ~segments_collide(vmap, top, candidates) & ~segments_collide(vmap, candidates, hidden)
    if not ok.any():
        raise ContactUnresolvableError(
            f"no corner between {top.tolist()} and {hidden.tolist()} restores line of sight "
            f"({len(candidates)} candidates from {len(cells)} cells)"
        )
    valid = candidates[ok]
    cost = np.linalg.norm(valid - top, axis=1) + np.linalg.norm(hidden - valid, axis=1)
    return valid[int(np.argmin(cost))]


def advance_contacts(
    stack: list[np.ndarray],
    wp_visible: np.ndarray,
    wp: np.ndarray,
    original: VoxelMap,
    centers: np.ndarray | None = None,
) -> tuple[str, np.ndarray] | None:
    """Apply one waypoint step to ``stack`` in place.

    Returns ``("pop", contact)``, ``("push", contact)`` or None.
    """
    current = stack[-1]
    relax = False
    if len(stack) > 1:
        last = stack[-2]
        if not segment_collides(original, last, wp):
            relax = not obstacle_confined(current, last, wp, original, centers)
    if relax:
        return "pop", stack.pop()
    if segment_collides(original, current, wp):
        cp = find_contact_point(current, wp_visible, wp, original)
        stack.append(cp)
        return "push", cp
    return None


def plan_contacts(
    map_original: VoxelMap,
    map_inflated: VoxelMap,
    path: np.ndarray,
    tether_origin: PointLike,
) -> ContactPlan:
    """Annotate every waypoint of ``path`` with its planned tether contact.

    Raises:
        ValidationError: If the path is not valid in ``map_inflated``.
        InvalidReelError: If the tether origin is not free in ``map_original``.
        ContactUnresolvableError: If a new contact cannot be placed.
    """
    wps = as_points(path)
    origin = as_array(tether_origin)
    if not path_is_valid(map_inflated, wps):
        raise ValidationError("path is not collision-free in the inflated map")
    if not is_free(map_original, origin):
        raise InvalidReelError(f"tether origin {origin.tolist()} is occupied or outside the map")

    centers = occupied_centers(map_original)
    stack = [origin]
    contacts = np.tile(origin, (len(wps), 1))
    events: list[ContactEvent] = []
    for i, wp in enumerate(wps):
        wp_visible = wps[i - 1] if i > 0 else stack[-1]
        step = advance_contacts(stack, wp_visible, wp, map_original, centers)
        if step is not None:
            kind, cp = step
            contacts[i:] = stack[-1]
            events.append(ContactEvent(index=i, kind=kind, contact=Point3.of(cp), depth=len(stack)))
            logger.debug("Waypoint %d: %s %s, depth %d", i, kind, np.round(cp, 4).tolist(), len(stack))
        if segment_collides(map_original, stack[-1], wp):
            raise ContactUnresolvableError(f"waypoint {i} lost sight of its contact after planning")

    logger.info(
        "Contact plan: %d waypoints, %d pushes, %d pops",
        len(wps),
        sum(e.kind == "push" for e in events),
        sum(e.kind == "pop" for e in events),
    )
    return ContactPlan(waypoints=wps, contacts=contacts, tether_origin=origin, events=events)


def plan_contacts_refined(
    map_original: VoxelMap,
    map_inflated: VoxelMap,
    path: np.ndarray,
    tether_origin: PointLike,
    *,
    step_max: float = config.DEFAULT_STEP_MAX,
    levels: int = config.DEFAULT_REFINEMENT_LEVELS,
) -> ContactPlan:
    """plan_contacts, densifying the path on unresolvable contacts.

    Level n re-densifies the original path to ``step_max / 2**n``.
    """
    try:
        return plan_contacts(map_original, map_inflated, path, tether_origin)
    except ContactUnresolvableError as e:
        failure = e
    for level in range(1, levels + 1):
        step = step_max / 2**level
        logger.info("Contact placement failed (%s); retrying at step %.4f m", failure.message, step)
        try:
            plan = plan_contacts(map_original, map_inflated, densify_path(path, step), tether_origin)
        except ContactUnresolvableError as e:
            failure = e
            continue
        return replace(plan, refinement_level=level)
    raise failure


def tether_violations(original: VoxelMap, plan: AnnotatedPath) -> list[int]:
    """Waypoint indices whose tether polyline origin -> contacts -> waypoint touches an obstacle."""
    bad = []
    for i, wp in enumerate(plan.waypoints):
        polyline = np.vstack([plan.contact_stack_at(i), wp[None, :]])
        if segments_collide(original, polyline[:-1], polyline[1:]).any():
            bad.append(i)
    return bad


def plan_contact(
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
) -> ContactPlan:
    """Plan in the inflated free space and annotate with contacts.

    Multi-stop plans are contact-annotated as one concatenated path, so a
    contact formed on one leg can be relaxed on the next.

    Raises:
        InvalidEndpointError: If a stop is not free in ``vmap``.
        NoPathError: If the roadmap does not connect the stops.
        ContactUnresolvableError: If refinement cannot place a contact.
    """
    params = prm_params or PRMParams()
    stops = [as_array(start), *(as_array(p) for p in mid_points), as_array(goal)]
    for n, p in enumerate(stops):
        if not is_free(vmap, p):
            label = "start" if n == 0 else "goal" if n == len(stops) - 1 else f"mid point {n}"
            raise InvalidEndpointError(f"{label} {p.tolist()} is not in free space")

    if route is not None:
        path = densify_path(as_points(route), params.step_max)
        if not path_is_valid(vmap, path):
            raise ValidationError("route is not collision-free in the inflated map")
    else:
        roadmap = roadmap or build_prm(vmap, params.n_samples, params.k_neighbors, params.seed)
        path = plan_route(roadmap, vmap, stops, params)

    return plan_contacts_refined(original, vmap, path, reel, step_max=params.step_max)
