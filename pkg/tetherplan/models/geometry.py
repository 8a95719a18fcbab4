"""Geometry primitives shared by every module.

World frame: meters, y is up, azimuth is measured from +z toward +x.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class Point3(BaseModel):
    """A point in the world frame."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    x: float
    y: float
    z: float

    @model_validator(mode="before")
    @classmethod
    def _from_sequence(cls, data):
        # Files may write points as [x, y, z].
        if isinstance(data, (list, tuple)):
            if len(data) != 3:
                raise ValueError(f"a point needs 3 coordinates, got {len(data)}")
            return {"x": data[0], "y": data[1], "z": data[2]}
        return data

    @field_validator("x", "y", "z")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("coordinates must be finite")
        return v

    @classmethod
    def of(cls, p: PointLike) -> Point3:
        """Build from any point-like value."""
        if isinstance(p, Point3):
            return p
        x, y, z = (float(v) for v in p)
        return cls(x=x, y=y, z=z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


class CellIndex(NamedTuple):
    """Integer index of a voxel cell."""

    i: int
    j: int
    k: int


PointLike = Union[Point3, Sequence[float], np.ndarray]


def as_array(p: PointLike) -> np.ndarray:
    """Convert a point-like value to a float array of shape (3,)."""
    if isinstance(p, Point3):
        return p.as_array()
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    return arr


def as_points(points: Sequence[PointLike] | np.ndarray) -> np.ndarray:
    """Convert a sequence of points to an (n, 3) float array."""
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
    else:
        arr = np.array([as_array(p) for p in points], dtype=float).reshape(-1, 3)
    return arr.reshape(-1, 3)


def polyline_length(points: np.ndarray) -> float:
    """Sum of consecutive Euclidean distances."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
