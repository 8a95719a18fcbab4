"""Shared maps, routes and plans."""

from __future__ import annotations

import math

import numpy as np
import pytest

from tetherplan import config
from tetherplan.models import PRMParams
from tetherplan.voxel_map import VoxelMap, inflate, load_map

MAPS_DIR = config.SCENARIO_DIR / "maps"

# Reel and arc radius of the pillar scenes.
PILLAR_REEL = np.array([0.35, 0.05, 0.35])
ARC_RADIUS = 2.6


def arc_point(alpha_deg: float, y: float) -> np.ndarray:
    """Point on the horizontal arc around the pillar-scene reel."""
    a = math.radians(alpha_deg)
    return np.array([PILLAR_REEL[0] + ARC_RADIUS * math.cos(a), y, PILLAR_REEL[2] + ARC_RADIUS * math.sin(a)])


def double_wrap_route() -> np.ndarray:
    high = [arc_point(a, 1.5) for a in (20, 30, 40, 47)]
    low = [arc_point(a, 0.3) for a in (50, 53, 55.5, 57.8)]
    return np.array(high + low)


def wrap_and_return_route() -> np.ndarray:
    return np.array([arc_point(a, 1.5) for a in (20, 30, 40, 45, 40, 30, 20)])


def dense_cells(vmap: VoxelMap, a: np.ndarray, b: np.ndarray) -> set[tuple[int, int, int]]:
    """In-bounds cells holding a sample of [a, b] taken every resolution / 100."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    n = max(2, int(np.ceil(np.linalg.norm(b - a) / (vmap.resolution / 100))) + 1)
    pts = a + np.linspace(0.0, 1.0, n)[:, None] * (b - a)
    idx = np.floor((pts - vmap.origin) / vmap.resolution).astype(int)
    idx = idx[np.all((idx >= 0) & (idx < np.array(vmap.dims)), axis=1)]
    return {tuple(int(v) for v in c) for c in np.unique(idx, axis=0)}


def box_distances(vmap: VoxelMap, cells: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from [a, b] to the closed box of each cell, by ternary search on the convex distance."""
    cells = np.asarray(cells, dtype=float).reshape(-1, 3)
    lo = vmap.origin + cells * vmap.resolution
    hi = lo + vmap.resolution
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)

    def dist(t: np.ndarray) -> np.ndarray:
        p = a + t[:, None] * (b - a)
        return np.linalg.norm(np.maximum(lo - p, 0.0) + np.maximum(p - hi, 0.0), axis=1)

    left, right = np.zeros(len(cells)), np.ones(len(cells))
    for _ in range(100):
        m1, m2 = left + (right - left) / 3, right - (right - left) / 3
        closer = dist(m1) <= dist(m2)
        right = np.where(closer, m2, right)
        left = np.where(closer, left, m1)
    return np.minimum.reduce([dist(left), dist(np.zeros(len(cells))), dist(np.ones(len(cells)))])


@pytest.fixture
def column_map() -> VoxelMap:
    """6 x 3 x 6 unit cells with a full-height column at i = 2, k = 2."""
    return VoxelMap.from_cells((6, 3, 6), [(2, j, 2) for j in range(3)], resolution=1.0)


@pytest.fixture
def empty_map() -> VoxelMap:
    return VoxelMap.empty((20, 20, 20), resolution=0.1)


@pytest.fixture(scope="session")
def two_pillars() -> VoxelMap:
    return load_map(MAPS_DIR / "two_pillars.json")


@pytest.fixture(scope="session")
def pillar() -> VoxelMap:
    return load_map(MAPS_DIR / "pillar.json")


@pytest.fixture(scope="session")
def lab_room() -> VoxelMap:
    return load_map(MAPS_DIR / "lab_room.json")


@pytest.fixture(scope="session")
def lab_inflated(lab_room) -> VoxelMap:
    return inflate(lab_room, config.DEFAULT_ROBOT_RADIUS)


@pytest.fixture
def small_prm() -> PRMParams:
    return PRMParams(n_samples=300, k_neighbors=10, seed=3)
