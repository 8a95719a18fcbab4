"""Probabilistic roadmap: construction, shortest-path query and shortcut smoothing.

Paths are ``(p, 3)`` float arrays of waypoints.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

from tetherplan import config
from tetherplan.exceptions import (
    InvalidEndpointError,
    NoFreeSpaceError,
    NoPathError,
    SamplingExhaustedError,
    ValidationError,
)
from tetherplan.models import PointLike, PRMParams, as_array, as_points
from tetherplan.voxel_map import VoxelMap, is_free, segment_collides, segments_collide

logger = logging.getLogger(__name__)

_START = "start"
_GOAL = "goal"


@dataclass(frozen=True)
class Roadmap:
    """Sampled free vertices joined by collision-free straight edges."""

    vertices: np.ndarray
    graph: nx.Graph
    params: PRMParams
    tree: cKDTree = field(repr=False, compare=False)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return sorted((min(u, v), max(u, v), w) for u, v, w in self.graph.edges(data="weight"))

    def __len__(self) -> int:
        return len(self.vertices)


def build_prm(
    vmap: VoxelMap,
    n_samples: int = config.DEFAULT_N_SAMPLES,
    k_neighbors: int = config.DEFAULT_K_NEIGHBORS,
    seed: int = 0,
) -> Roadmap:
    """Build a roadmap over the free space of ``vmap``.

    Vertices are drawn uniformly by rejection sampling; each is joined to up
    to ``k_neighbors`` nearest vertices whose connecting segment is free.

    Raises:
        NoFreeSpaceError: If the map has no free cell.
        SamplingExhaustedError: If more than 1000 * n_samples draws are needed.
    """
    if n_samples < 2 or k_neighbors < 1:
        raise ValidationError(f"need n_samples >= 2 and k_neighbors >= 1, got {n_samples}, {k_neighbors}")
    if vmap.free_count == 0:
        raise NoFreeSpaceError("map has no free space to sample")

    rng = np.random.default_rng(seed)
    vertices = _sample_free(vmap, n_samples, rng)

    tree = cKDTree(vertices)
    k = min(k_neighbors, n_samples - 1)
    _, idx = tree.query(vertices, k=k + 1)
    pairs = {
        (min(i, int(j)), max(i, int(j)))
        for i in range(n_samples)
        for j in idx[i, 1:]
        if int(j) != i and int(j) < n_samples
    }
    candidates = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    a, b = vertices[candidates[:, 0]], vertices[candidates[:, 1]]
    free = ~segments_collide(vmap, a, b)
    lengths = np.linalg.norm(b - a, axis=1)

    graph = nx.Graph()
    graph.add_nodes_from(range(n_samples))
    graph.add_weighted_edges_from(
        (int(u), int(v), float(w)) for (u, v), w, ok in zip(candidates, lengths, free) if ok
    )
    logger.info(
        "Roadmap built: %d vertices, %d/%d edges free (seed=%d)",
        n_samples,
        graph.number_of_edges(),
        len(candidates),
        seed,
    )
    params = PRMParams(n_samples=n_samples, k_neighbors=k_neighbors, seed=seed)
    return Roadmap(vertices=vertices, graph=graph, params=params, tree=tree)


def _sample_free(vmap: VoxelMap, n: int, rng: np.random.Generator) -> np.ndarray:
    budget = 1000 * n
    attempts = 0
    chunks: list[np.ndarray] = []
    count = 0
    lo, hi = vmap.origin, vmap.upper
    while count < n:
        if attempts >= budget:
            raise SamplingExhaustedError(f"only {count} of {n} free samples after {attempts} draws")
        batch = min(max(64, 2 * (n - count)), budget - attempts)
        pts = lo + rng.random((batch, 3)) * (hi - lo)
        attempts += batch
        keep = pts[vmap.free_mask(pts)][: n - count]
        chunks.append(keep)
        count += len(keep)
    return np.concatenate(chunks, axis=0)


def visible_vertices(roadmap: Roadmap, vmap: VoxelMap, p: PointLike, limit: int) -> list[int]:
    """Up to ``limit`` roadmap vertices nearest to p with a free straight segment."""
    p = as_array(p)
    n = len(roadmap)
    k = min(n, max(4 * limit, limit + 20))
    while True:
        _, idx = roadmap.tree.query(p, k=k)
        idx = np.atleast_1d(idx)
        idx = idx[idx < n]
        free = ~segments_collide(vmap, p, roadmap.vertices[idx])
        found = [int(i) for i in idx[free][:limit]]
        if len(found) >= limit or k >= n:
            return found
        k = n


def query_path(
    roadmap: Roadmap,
    vmap: VoxelMap,
    start: PointLike,
    goal: PointLike,
    connect_neighbors: int = config.DEFAULT_CONNECT_NEIGHBORS,
) -> np.ndarray:
    """Shortest roadmap path from start to goal by edge length.

    Start and goal are attached to their nearest visible vertices, and to
    each other when the direct segment is free.

    Raises:
        InvalidEndpointError: If start or goal is not free in ``vmap``.
        NoPathError: If the graph does not connect them.
    """
    s, g = as_array(start), as_array(goal)
    for label, p in (("start", s), ("goal", g)):
        if not is_free(vmap, p):
            raise InvalidEndpointError(f"{label} {p.tolist()} is not in free space")
    if np.allclose(s, g):
        return s[None, :].copy()

    graph = roadmap.graph.copy()
    graph.add_nodes_from((_START, _GOAL))
    if not segment_collides(vmap, s, g):
        graph.add_edge(_START, _GOAL, weight=float(np.linalg.norm(g - s)))
    for node, p in ((_START, s), (_GOAL, g)):
        for v in visible_vertices(roadmap, vmap, p, connect_neighbors):
            graph.add_edge(node, v, weight=float(np.linalg.norm(roadmap.vertices[v] - p)))

    try:
        nodes = nx.shortest_path(graph, _START, _GOAL, weight="weight", method="dijkstra")
    except nx.NetworkXNoPath as e:
        raise NoPathError(f"no roadmap route from {s.tolist()} to {g.tolist()}") from e

    lookup = {_START: s, _GOAL: g}
    return np.array([lookup[n] if n in lookup else roadmap.vertices[n] for n in nodes])


def smooth_path(
    path: np.ndarray,
    vmap: VoxelMap,
    seed: int = 0,
    iterations: int = config.DEFAULT_SMOOTH_ITERATIONS,
    step_max: float = config.DEFAULT_STEP_MAX,
) -> np.ndarray:
    """Random shortcutting followed by densification to ``step_max`` spacing."""
    pts = [p for p in as_points(path)]
    rng = np.random.default_rng(seed)
    for _ in range(iterations):
        if len(pts) < 3:
            break
        i = int(rng.integers(0, len(pts) - 2))
        j = int(rng.integers(i + 2, len(pts)))
        if not segment_collides(vmap, pts[i], pts[j]):
            pts = pts[: i + 1] + pts[j:]
    return densify_path(np.array(pts), step_max)


def densify_path(path: np.ndarray, step_max: float = config.DEFAULT_STEP_MAX) -> np.ndarray:
    """Insert evenly spaced points so consecutive waypoints are <= step_max apart."""
    if step_max <= 0:
        raise ValidationError(f"step_max must be > 0, got {step_max}")
    pts = as_points(path)
    if len(pts) < 2:
        return pts.copy()
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        length = float(np.linalg.norm(b - a))
        if length < 1e-12:
            continue
        n = max(1, math.ceil(length / step_max - 1e-9))
        for s in range(1, n + 1):
            out.append(a + (b - a) * (s / n))
    return np.array(out)


def path_is_valid(vmap: VoxelMap, path: np.ndarray) -> bool:
    """All waypoints free and every consecutive segment collision-free."""
    pts = as_points(path)
    if len(pts) == 0 or not vmap.free_mask(pts).all():
        return False
    if len(pts) == 1:
        return True
    return not segments_collide(vmap, pts[:-1], pts[1:]).any()


def plan_route(
    roadmap: Roadmap,
    vmap: VoxelMap,
    stops: Sequence[PointLike],
    params: PRMParams,
) -> np.ndarray:
    """Query and smooth each leg between consecutive stops and join them.

    Legs are smoothed separately so every stop stays on the path.
    """
    legs: list[np.ndarray] = []
    points = [as_array(p) for p in stops]
    for n, (a, b) in enumerate(zip(points[:-1], points[1:])):
        raw = query_path(roadmap, vmap, a, b, connect_neighbors=params.connect_neighbors)
        leg = smooth_path(raw, vmap, seed=params.seed + n, iterations=params.smooth_iterations, step_max=params.step_max)
        legs.append(leg if not legs else leg[1:])
    if not legs:
        return np.array(points)
    return np.concatenate(legs, axis=0)
