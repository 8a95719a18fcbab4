"""3-D occupancy grid: loading, inflation, point and segment collision queries.

Segment queries use supercover semantics on closed cell boxes: a cell counts
as touched when the closed segment meets its closed box, so grazing a face,
edge or corner of an occupied cell is a collision.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
from itertools import product
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from pydantic import ValidationError as PydanticValidationError
from scipy import ndimage

from tetherplan import config
from tetherplan.exceptions import MapFormatError, ValidationError
from tetherplan.models import CellIndex, MapDocument, PointLike, as_array

logger = logging.getLogger(__name__)

# Tolerance in grid units for "lies on a cell plane".
_EPS = 1e-9
# Upper bound on sample points evaluated per vectorized chunk.
_CHUNK_POINTS = 200_000
_CORNER_OFFSETS = np.array(list(product((0, 1), repeat=3)), dtype=np.int64)


class VoxelMap:
    """Immutable 3-D occupancy grid.

    Cell ``(i, j, k)`` spans ``origin + [i, i+1) * resolution`` on x and the
    same on y (up) and z. The boolean ``grid`` has shape ``dims``.
    """

    def __init__(
        self,
        grid: np.ndarray,
        resolution: float,
        origin: PointLike = (0.0, 0.0, 0.0),
        *,
        inflated_by: float = 0.0,
        name: str | None = None,
    ):
        grid = np.array(grid, dtype=bool)
        if grid.ndim != 3 or min(grid.shape) < 1:
            raise ValidationError(f"grid must be 3-D with every dim >= 1, got shape {grid.shape}")
        if not (math.isfinite(resolution) and resolution > 0):
            raise ValidationError(f"resolution must be > 0, got {resolution}")
        if not (math.isfinite(inflated_by) and inflated_by >= 0):
            raise ValidationError(f"inflated_by must be >= 0, got {inflated_by}")
        origin_arr = as_array(origin).copy()
        if not np.all(np.isfinite(origin_arr)):
            raise ValidationError("origin must be finite")

        grid.setflags(write=False)
        origin_arr.setflags(write=False)
        self._grid = grid
        self._origin = origin_arr
        self.resolution = float(resolution)
        self.inflated_by = float(inflated_by)
        self._name = name

    def __repr__(self) -> str:
        return (
            f"VoxelMap(dims={self.dims}, resolution={self.resolution}, "
            f"occupied={self.occupied_count}, inflated_by={self.inflated_by})"
        )

    # Construction

    @classmethod
    def empty(
        cls, dims: Sequence[int], resolution: float = config.DEFAULT_RESOLUTION, origin: PointLike = (0, 0, 0)
    ) -> VoxelMap:
        return cls(np.zeros(tuple(int(n) for n in dims), dtype=bool), resolution, origin)

    @classmethod
    def from_cells(
        cls,
        dims: Sequence[int],
        cells: Iterable[Sequence[int]],
        resolution: float = config.DEFAULT_RESOLUTION,
        origin: PointLike = (0, 0, 0),
    ) -> VoxelMap:
        grid = np.zeros(tuple(int(n) for n in dims), dtype=bool)
        for cell in cells:
            i, j, k = (int(c) for c in cell)
            if not (0 <= i < grid.shape[0] and 0 <= j < grid.shape[1] and 0 <= k < grid.shape[2]):
                raise ValidationError(f"cell {[i, j, k]} outside dims {list(grid.shape)}")
            grid[i, j, k] = True
        return cls(grid, resolution, origin)

    @classmethod
    def from_document(cls, doc: MapDocument, *, name: str | None = None) -> VoxelMap:
        """Build from a validated document; ``name`` is used when the document has none."""
        grid = np.zeros(doc.dims, dtype=bool)
        for i, j, k in doc.occupied:
            grid[i, j, k] = True
        for (i0, j0, k0), (i1, j1, k1) in doc.boxes:
            grid[i0 : i1 + 1, j0 : j1 + 1, k0 : k1 + 1] = True
        return cls(grid, doc.resolution, doc.origin, name=doc.name or name)

    def to_document(self) -> MapDocument:
        cells = [tuple(int(v) for v in c) for c in np.argwhere(self._grid)]
        return MapDocument(
            resolution=self.resolution,
            dims=self.dims,
            origin=tuple(float(v) for v in self._origin),
            occupied=cells,
            name=self.name,
        )

    def with_grid(self, grid: np.ndarray, *, inflated_by: float | None = None) -> VoxelMap:
        """A map with the same geometry and a different occupancy grid."""
        if grid.shape != self._grid.shape:
            raise ValidationError(f"grid shape {grid.shape} does not match dims {self.dims}")
        return VoxelMap(
            grid,
            self.resolution,
            self._origin,
            inflated_by=self.inflated_by if inflated_by is None else inflated_by,
            name=self.name,
        )

    # Properties

    @property
    def name(self) -> str | None:
        return self._name

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    @property
    def origin(self) -> np.ndarray:
        return self._origin

    @property
    def dims(self) -> tuple[int, int, int]:
        nx, ny, nz = self._grid.shape
        return (nx, ny, nz)

    @property
    def upper(self) -> np.ndarray:
        """Max corner of the map bounds."""
        return self._origin + np.array(self.dims) * self.resolution

    @property
    def occupied(self) -> frozenset[CellIndex]:
        return frozenset(CellIndex(*(int(v) for v in c)) for c in np.argwhere(self._grid))

    @property
    def occupied_count(self) -> int:
        return int(self._grid.sum())

    @property
    def free_count(self) -> int:
        return int(self._grid.size - self._grid.sum())

    def digest(self) -> str:
        """Content hash of geometry and occupancy."""
        h = hashlib.sha256()
        h.update(json.dumps([self.dims, self.resolution, self._origin.tolist()]).encode())
        h.update(np.packbits(self._grid).tobytes())
        return h.hexdigest()[:16]

    # Cell conversions

    def to_grid_units(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self._origin) / self.resolution

    def cells_of(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Cell indices of an (n, 3) array and a mask of in-bounds points."""
        idx = np.floor(self.to_grid_units(points)).astype(np.int64)
        inside = np.all((idx >= 0) & (idx < np.array(self.dims)), axis=-1)
        return idx, inside

    def cell_of(self, p: PointLike) -> CellIndex | None:
        """Containing cell, or None outside the map."""
        idx, inside = self.cells_of(as_array(p)[None, :])
        if not inside[0]:
            return None
        return CellIndex(*(int(v) for v in idx[0]))

    def center(self, cell: Sequence[int]) -> np.ndarray:
        return self._origin + (np.asarray(cell, dtype=float) + 0.5) * self.resolution

    def centers(self, cells: np.ndarray) -> np.ndarray:
        return self._origin + (np.asarray(cells, dtype=float) + 0.5) * self.resolution

    def in_bounds(self, cell: Sequence[int]) -> bool:
        return all(0 <= int(c) < n for c, n in zip(cell, self.dims))

    def is_occupied(self, cell: Sequence[int]) -> bool:
        i, j, k = (int(c) for c in cell)
        return bool(self._grid[i, j, k])

    def occupied_mask(self, cells: np.ndarray) -> np.ndarray:
        """Occupancy of integer cells of shape (..., 3); out-of-bounds cells read as free."""
        return _occupied_at(self._grid, np.asarray(cells, dtype=np.int64))

    def free_mask(self, points: np.ndarray) -> np.ndarray:
        """Vectorized is_free over an (n, 3) array."""
        idx, inside = self.cells_of(np.asarray(points, dtype=float).reshape(-1, 3))
        safe = np.where(inside[:, None], idx, 0)
        return inside & ~self._grid[safe[:, 0], safe[:, 1], safe[:, 2]]


# Loading


def load_map(path: str | Path) -> VoxelMap:
    """Load a map from a JSON document or an ASCII-layer text file.

    Raises:
        MapFormatError: If the file cannot be parsed.
        ValidationError: If values are out of range (zero resolution, cells
            outside dims).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise MapFormatError(f"{path}: cannot read map file: {e}") from e

    if path.suffix.lower() == ".json":
        vmap = parse_map_document(text, source=str(path), name=path.stem)
    else:
        vmap = parse_ascii_map(text, source=str(path), name=path.stem)
    logger.debug("Loaded %s from %s", vmap, path)
    return vmap


_STRUCTURE_ERRORS = ("missing", "too_short", "too_long", "extra_forbidden", "model_type")


def parse_map_document(text: str, source: str = "<map>", name: str | None = None) -> VoxelMap:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MapFormatError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        doc = MapDocument.model_validate(data)
    except PydanticValidationError as e:
        err = e.errors()[0]
        field = ".".join(str(p) for p in err["loc"]) or "<root>"
        message = f"{source}: field '{field}': {err['msg']}"
        kind = err["type"]
        if kind in _STRUCTURE_ERRORS or kind.endswith("_type") or kind.endswith("_parsing"):
            raise MapFormatError(message) from e
        raise ValidationError(message) from e
    return VoxelMap.from_document(doc, name=name)


_HEADER = re.compile(r"^\s*(resolution|origin)\s*:\s*(.+?)\s*$")


def parse_ascii_map(
    text: str,
    source: str = "<ascii>",
    resolution: float = config.DEFAULT_RESOLUTION,
    origin: PointLike = (0.0, 0.0, 0.0),
    name: str | None = None,
) -> VoxelMap:
    """Parse the hand-authored layer format.

    One character per cell (``#`` occupied, ``.`` free). Each layer is one y
    index, bottom layer first, layers separated by blank lines. Inside a
    layer row r is z index r and column c is x index c. Optional
    ``resolution: <m>`` and ``origin: <x> <y> <z>`` lines may precede the
    first layer; lines starting with ``;`` are comments.
    """
    origin_val = list(as_array(origin))
    layers: list[list[str]] = []
    current: list[str] = []
    layer_start: list[int] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith(";"):
            continue
        header = _HEADER.match(line)
        if header and not layers and not current:
            key, value = header.groups()
            try:
                if key == "resolution":
                    resolution = float(value)
                else:
                    origin_val = [float(v) for v in value.replace(",", " ").split()]
                    if len(origin_val) != 3:
                        raise ValueError("origin needs 3 values")
            except ValueError as e:
                raise MapFormatError(f"{source}: line {lineno}: bad {key}: {e}") from e
            continue
        if not line:
            if current:
                layers.append(current)
                current = []
            continue
        bad = set(line) - {"#", "."}
        if bad:
            raise MapFormatError(f"{source}: line {lineno}: unexpected characters {sorted(bad)}")
        if not current:
            layer_start.append(lineno)
        current.append(line)
    if current:
        layers.append(current)
    if not layers:
        raise MapFormatError(f"{source}: no layers found")

    nz = len(layers[0])
    nx = len(layers[0][0])
    for n, layer in enumerate(layers):
        if len(layer) != nz:
            raise MapFormatError(f"{source}: line {layer_start[n]}: layer has {len(layer)} rows, expected {nz}")
        for r, row in enumerate(layer):
            if len(row) != nx:
                raise MapFormatError(
                    f"{source}: line {layer_start[n] + r}: row has {len(row)} cells, expected {nx}"
                )

    grid = np.zeros((nx, len(layers), nz), dtype=bool)
    for j, layer in enumerate(layers):
        for k, row in enumerate(layer):
            grid[:, j, k] = [ch == "#" for ch in row]
    return VoxelMap(grid, resolution, origin_val, name=name)


# Operations


def inflate(vmap: VoxelMap, radius: float) -> VoxelMap:
    """Grow obstacles by ``radius`` meters.

    A cell is occupied in the result iff some occupied cell center lies within
    Euclidean distance <= radius of its center.
    """
    if not (math.isfinite(radius) and radius >= 0):
        raise ValidationError(f"inflation radius must be >= 0, got {radius}")
    reach = radius / vmap.resolution
    n = int(math.floor(reach + _EPS))
    if n == 0 or not vmap.grid.any():
        grid = vmap.grid
    else:
        axis = np.arange(-n, n + 1)
        ii, jj, kk = np.meshgrid(axis, axis, axis, indexing="ij")
        ball = ii**2 + jj**2 + kk**2 <= reach**2 + _EPS
        grid = ndimage.binary_dilation(vmap.grid, structure=ball)
    inflated = vmap.with_grid(grid, inflated_by=vmap.inflated_by + radius)
    logger.debug("Inflated by %.3f m: %d -> %d occupied", radius, vmap.occupied_count, inflated.occupied_count)
    return inflated


def resample(vmap: VoxelMap, resolution: float) -> VoxelMap:
    """Re-grid at another resolution over the same extent.

    A new cell is occupied iff it overlaps an occupied cell of the input.
    """
    if not (math.isfinite(resolution) and resolution > 0):
        raise ValidationError(f"resolution must be > 0, got {resolution}")
    if math.isclose(resolution, vmap.resolution):
        return vmap
    old = np.array(vmap.dims)
    extent = old * vmap.resolution
    ratio = resolution / vmap.resolution
    bounds = []
    for n_old, size in zip(old, extent):
        n_new = max(1, math.ceil(size / resolution - _EPS))
        lo = np.floor(np.arange(n_new) * ratio + _EPS).astype(int)
        hi = np.ceil(np.minimum((np.arange(n_new) + 1) * ratio, n_old) - _EPS).astype(int)
        bounds.append((np.clip(lo, 0, n_old), np.clip(np.maximum(hi, lo + 1), 0, n_old)))

    # Summed-area table with a zero border: block sums by inclusion-exclusion.
    table = np.zeros(tuple(old + 1), dtype=np.int64)
    table[1:, 1:, 1:] = vmap.grid.cumsum(0).cumsum(1).cumsum(2)
    total = np.zeros(tuple(len(b[0]) for b in bounds), dtype=np.int64)
    for corner in product((0, 1), repeat=3):
        idx = np.ix_(*(bounds[ax][side] for ax, side in enumerate(corner)))
        sign = -1 if (3 - sum(corner)) % 2 else 1
        total += sign * table[idx]
    out = VoxelMap(total > 0, resolution, vmap.origin, inflated_by=vmap.inflated_by, name=vmap.name)
    logger.info("Resampled %s -> dims %s at %.3f m", vmap.dims, out.dims, resolution)
    return out


def is_free(vmap: VoxelMap, p: PointLike) -> bool:
    """True iff p is inside the map and its cell is unoccupied."""
    return bool(vmap.free_mask(as_array(p)[None, :])[0])


def segment_collides(vmap: VoxelMap, a: PointLike, b: PointLike) -> bool:
    """True iff the closed segment [a, b] touches any occupied cell."""
    return bool(segments_collide(vmap, as_array(a), as_array(b)[None, :])[0])


def segments_collide(vmap: VoxelMap, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized segment_collides.

    ``a`` and ``b`` broadcast against each other as (n, 3) or (3,) arrays.
    Returns a boolean array of length n.
    """
    a2 = np.atleast_2d(np.asarray(a, dtype=float))
    b2 = np.atleast_2d(np.asarray(b, dtype=float))
    a2, b2 = np.broadcast_arrays(a2, b2)
    out = np.zeros(len(a2), dtype=bool)
    if len(a2) == 0 or not vmap.grid.any():
        return out

    dims = vmap.dims
    ua_all = vmap.to_grid_units(a2)
    ub_all = vmap.to_grid_units(b2)
    span = np.abs(ub_all - ua_all).max(axis=0)
    points_per_row = 2 * (2 + int(np.sum(np.minimum(np.ceil(span), dims))) + 3)
    rows = max(1, _CHUNK_POINTS // max(points_per_row, 1))

    for start in range(0, len(a2), rows):
        ua = ua_all[start : start + rows]
        d = ub_all[start : start + rows] - ua
        params = _sample_params(ua, d, dims, ordered=False)
        valid = ~np.isnan(params)
        pts = ua[:, None, :] + np.where(valid, params, 0.0)[..., None] * d[:, None, :]
        cells = _closed_box_cells(pts)
        hit = _occupied_at(vmap.grid, cells).any(axis=2) & valid
        out[start : start + rows] = hit.any(axis=1)
    return out


def occupied_cells_touched(vmap: VoxelMap, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unique occupied cells touched by any of the segments [a, b], as an (m, 3) array."""
    a2 = np.atleast_2d(np.asarray(a, dtype=float))
    b2 = np.atleast_2d(np.asarray(b, dtype=float))
    a2, b2 = np.broadcast_arrays(a2, b2)
    found = [np.empty((0, 3), dtype=np.int64)]
    if len(a2) and vmap.grid.any():
        ua = vmap.to_grid_units(a2)
        d = vmap.to_grid_units(b2) - ua
        params = _sample_params(ua, d, vmap.dims, ordered=False)
        valid = ~np.isnan(params)
        pts = ua[:, None, :] + np.where(valid, params, 0.0)[..., None] * d[:, None, :]
        cells = _closed_box_cells(pts)
        hit = _occupied_at(vmap.grid, cells) & valid[..., None]
        found.append(cells[hit])
    return np.unique(np.concatenate(found, axis=0), axis=0)


def cells_on_segment(vmap: VoxelMap, a: PointLike, b: PointLike) -> list[CellIndex]:
    """In-bounds cells touched by the closed segment [a, b], ordered from a to b."""
    ua = vmap.to_grid_units(as_array(a))[None, :]
    d = vmap.to_grid_units(as_array(b))[None, :] - ua
    params = _sample_params(ua, d, vmap.dims, ordered=True)[0]
    params = params[~np.isnan(params)]

    seen: set[CellIndex] = set()
    ordered: list[CellIndex] = []
    dims = np.array(vmap.dims)
    for t in params:
        point = ua[0] + t * d[0]
        candidates = np.unique(_closed_box_cells(point[None, :])[0], axis=0)
        candidates = candidates[np.all((candidates >= 0) & (candidates < dims), axis=1)]
        # Cells touched at the same parameter: order by progress along the segment.
        progress = (candidates + 0.5 - ua[0]) @ d[0]
        for n in np.lexsort((candidates[:, 2], candidates[:, 1], candidates[:, 0], progress)):
            cell = CellIndex(*(int(v) for v in candidates[n]))
            if cell not in seen:
                seen.add(cell)
                ordered.append(cell)
    return ordered


# Supercover internals


def _axis_crossings(u0: np.ndarray, du: np.ndarray, n: int) -> np.ndarray:
    """Parameters where segments cross integer planes 0..n of one axis, NaN-padded."""
    lo = np.minimum(u0, u0 + du)
    hi = np.maximum(u0, u0 + du)
    first = np.clip(np.ceil(lo - _EPS), 0, n)
    last = np.clip(np.floor(hi + _EPS), 0, n)
    width = int((last - first).max()) + 1 if len(u0) else 0
    if width <= 0:
        return np.empty((len(u0), 0))
    planes = first[:, None] + np.arange(width)[None, :]
    moving = np.abs(du) > _EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (planes - u0[:, None]) / np.where(moving, du, 1.0)[:, None]
    valid = (planes <= last[:, None]) & moving[:, None] & (t >= -_EPS) & (t <= 1 + _EPS)
    return np.where(valid, np.clip(t, 0.0, 1.0), np.nan)


def _sample_params(ua: np.ndarray, d: np.ndarray, dims: Sequence[int], *, ordered: bool) -> np.ndarray:
    """Breakpoints (endpoints and plane crossings) plus the midpoint of every gap.

    Every cell whose closed box meets a segment contains one of these points.
    """
    m = len(ua)
    parts = [np.zeros((m, 1)), np.ones((m, 1))]
    parts += [_axis_crossings(ua[:, ax], d[:, ax], int(dims[ax])) for ax in range(3)]
    breaks = np.sort(np.concatenate(parts, axis=1), axis=1)
    mids = 0.5 * (breaks[:, :-1] + breaks[:, 1:])
    params = np.concatenate([breaks, mids], axis=1)
    if ordered:
        params = np.sort(params, axis=1)
    return params


def _closed_box_cells(u: np.ndarray) -> np.ndarray:
    """The 8 (possibly repeated) cells whose closed boxes contain each point.

    ``u`` has shape (..., 3) in grid units; the result has shape (..., 8, 3).
    """
    nearest = np.rint(u)
    on_plane = np.abs(u - nearest) < _EPS
    base = np.where(on_plane, nearest, np.floor(u)).astype(np.int64)
    step = np.where(on_plane[..., None, :], _CORNER_OFFSETS, 0)
    return base[..., None, :] - step


def _occupied_at(grid: np.ndarray, cells: np.ndarray) -> np.ndarray:
    inside = np.all((cells >= 0) & (cells < np.array(grid.shape)), axis=-1)
    safe = np.where(inside[..., None], cells, 0)
    return inside & grid[safe[..., 0], safe[..., 1], safe[..., 2]]
