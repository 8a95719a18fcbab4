"""Map loading, inflation, re-gridding and collision queries."""

from __future__ import annotations

import json

import numpy as np
import pytest

from tests.conftest import box_distances, dense_cells
from tetherplan.exceptions import MapFormatError, ValidationError
from tetherplan.voxel_map import (
    VoxelMap,
    cells_on_segment,
    inflate,
    is_free,
    load_map,
    parse_ascii_map,
    resample,
    segment_collides,
    segments_collide,
)

ASCII_MAP = """\
; two layers, three rows (z), four columns (x)
resolution: 0.5
origin: 1 0 -1
....
.#..
....

#...
....
...#
"""


class TestLoading:
    def test_json_boxes_and_cells(self, tmp_path):
        path = tmp_path / "room.json"
        path.write_text(
            json.dumps(
                {
                    "resolution": 0.1,
                    "dims": [5, 4, 5],
                    "occupied": [[0, 0, 0]],
                    "boxes": [[[2, 0, 2], [3, 3, 2]]],
                }
            )
        )
        vmap = load_map(path)
        assert vmap.dims == (5, 4, 5)
        assert vmap.occupied_count == 1 + 2 * 4
        assert vmap.is_occupied((3, 3, 2))
        assert vmap.name == "room"

    def test_ascii_layers(self, tmp_path):
        path = tmp_path / "layers.txt"
        path.write_text(ASCII_MAP)
        vmap = load_map(path)
        assert vmap.dims == (4, 2, 3)
        assert vmap.resolution == 0.5
        np.testing.assert_allclose(vmap.origin, [1.0, 0.0, -1.0])
        assert vmap.occupied == {(1, 0, 1), (0, 1, 0), (3, 1, 2)}
        assert vmap.name == "layers"

    def test_name_is_set_at_construction(self, tmp_path):
        path = tmp_path / "file_stem.json"
        path.write_text(json.dumps({"name": "declared", "resolution": 0.1, "dims": [2, 2, 2]}))
        vmap = load_map(path)
        assert vmap.name == "declared"
        with pytest.raises(AttributeError):
            vmap.name = "renamed"

    def test_ascii_bad_character_reports_line(self):
        with pytest.raises(MapFormatError, match="line 3"):
            parse_ascii_map("....\n.#..\n.x..\n")

    def test_ascii_ragged_row_reports_line(self):
        with pytest.raises(MapFormatError, match="line 2"):
            parse_ascii_map("....\n...\n")

    def test_missing_field_is_a_format_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dims": [2, 2, 2]}))
        with pytest.raises(MapFormatError, match="resolution"):
            load_map(path)

    def test_broken_json_is_a_format_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"resolution": 0.1,\n "dims": [2, 2, 2')
        with pytest.raises(MapFormatError, match="line"):
            load_map(path)

    @pytest.mark.parametrize(
        "doc",
        [
            {"resolution": 0, "dims": [2, 2, 2]},
            {"resolution": 0.1, "dims": [2, 2, 2], "occupied": [[2, 0, 0]]},
            {"resolution": 0.1, "dims": [0, 2, 2]},
        ],
    )
    def test_out_of_range_values(self, tmp_path, doc):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError) as info:
            load_map(path)
        assert not isinstance(info.value, MapFormatError)

    def test_document_round_trip_keeps_digest(self, two_pillars):
        again = VoxelMap.from_document(two_pillars.to_document())
        assert again.digest() == two_pillars.digest()

    def test_digest_tracks_content(self):
        a = VoxelMap.from_cells((3, 3, 3), [(1, 1, 1)])
        b = VoxelMap.from_cells((3, 3, 3), [(1, 1, 1)])
        c = VoxelMap.from_cells((3, 3, 3), [(1, 1, 2)])
        assert a.digest() == b.digest()
        assert a.digest() != c.digest()


class TestPointQueries:
    def test_is_free(self, column_map):
        assert is_free(column_map, (0.5, 0.5, 0.5))
        assert not is_free(column_map, (2.5, 1.5, 2.5))
        assert not is_free(column_map, (-0.1, 0.5, 0.5))
        assert not is_free(column_map, (6.0, 0.5, 0.5))

    def test_cell_of_uses_half_open_cells(self, column_map):
        assert column_map.cell_of((2.0, 0.0, 2.999)) == (2, 0, 2)
        assert column_map.cell_of((6.0, 0.0, 0.0)) is None

    @pytest.mark.parametrize("resolution,origin", [(1.0, (0, 0, 0)), (0.1, (0, 0, 0)), (0.05, (-1.3, 0.2, 7.7))])
    def test_cell_of_center_is_the_cell(self, resolution, origin):
        vmap = VoxelMap.empty((7, 5, 9), resolution=resolution, origin=origin)
        for cell in np.argwhere(np.ones(vmap.dims, dtype=bool)):
            assert vmap.cell_of(vmap.center(cell)) == tuple(cell)


class TestInflate:
    @pytest.fixture
    def dot(self):
        return VoxelMap.from_cells((11, 11, 11), [(5, 5, 5)], resolution=0.1)

    @pytest.mark.parametrize("radius,expected", [(0.0, 1), (0.1, 7), (0.15, 19), (0.175, 27)])
    def test_ball_of_cell_centers(self, dot, radius, expected):
        assert inflate(dot, radius).occupied_count == expected

    def test_records_radius(self, dot):
        assert inflate(dot, 0.2).inflated_by == pytest.approx(0.2)

    def test_negative_radius(self, dot):
        with pytest.raises(ValidationError):
            inflate(dot, -0.1)

    def test_clipped_at_map_edge(self):
        corner = VoxelMap.from_cells((4, 4, 4), [(0, 0, 0)], resolution=1.0)
        assert inflate(corner, 1.0).occupied == {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_monotone_in_radius(self):
        rng = np.random.default_rng(3)
        vmap = VoxelMap((rng.random((12, 12, 12)) < 0.02), resolution=0.1)
        grids = [inflate(vmap, r).grid for r in (0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.45)]
        for smaller, larger in zip(grids, grids[1:]):
            assert not (smaller & ~larger).any()


class TestResample:
    @pytest.fixture
    def corner(self):
        return VoxelMap.from_cells((4, 4, 4), [(0, 0, 0)], resolution=0.1)

    def test_coarser(self, corner):
        coarse = resample(corner, 0.2)
        assert coarse.dims == (2, 2, 2)
        assert coarse.occupied == {(0, 0, 0)}

    def test_finer(self, corner):
        fine = resample(corner, 0.05)
        assert fine.dims == (8, 8, 8)
        assert fine.occupied_count == 8
        assert fine.is_occupied((1, 1, 1))

    def test_same_resolution_is_identity(self, corner):
        assert resample(corner, 0.1) is corner

    def test_any_overlap_occupies(self):
        vmap = VoxelMap.from_cells((3, 1, 1), [(1, 0, 0)], resolution=1.0)
        assert resample(vmap, 2.0).occupied == {(0, 0, 0)}


class TestSegments:
    @pytest.fixture
    def cube(self):
        return VoxelMap.from_cells((3, 3, 3), [(1, 1, 1)], resolution=1.0)

    def test_grazing_a_corner_collides(self, cube):
        assert segment_collides(cube, (0.0, 1.0, 1.0), (1.0, 1.0, 1.0))
        assert segment_collides(cube, (0.2, 0.2, 0.2), (1.0, 1.0, 1.0))

    def test_stopping_short_is_free(self, cube):
        assert not segment_collides(cube, (0.0, 1.0, 1.0), (0.999, 1.0, 1.0))

    def test_passing_through(self, cube):
        assert segment_collides(cube, (0.5, 1.5, 1.5), (2.5, 1.5, 1.5))

    def test_passing_beside(self, cube):
        assert not segment_collides(cube, (0.5, 0.5, 0.5), (2.5, 0.5, 0.5))

    def test_out_of_bounds_segment_parts_are_free(self, cube):
        assert not segment_collides(cube, (-2.0, 0.5, 0.5), (5.0, 0.5, 0.5))

    def test_vectorized_matches_single(self):
        rng = np.random.default_rng(11)
        vmap = VoxelMap((rng.random((8, 8, 8)) < 0.08), resolution=0.25)
        a = rng.random((300, 3)) * 2.0
        b = rng.random((300, 3)) * 2.0
        single = [segment_collides(vmap, p, q) for p, q in zip(a, b)]
        assert segments_collide(vmap, a, b).tolist() == single

    def test_cells_on_segment_in_order(self):
        row = VoxelMap.empty((3, 1, 1), resolution=1.0)
        assert cells_on_segment(row, (0.5, 0.5, 0.5), (2.5, 0.5, 0.5)) == [(0, 0, 0), (1, 0, 0), (2, 0, 0)]
        assert cells_on_segment(row, (2.5, 0.5, 0.5), (0.5, 0.5, 0.5)) == [(2, 0, 0), (1, 0, 0), (0, 0, 0)]

    def test_reversed_segment_collides_alike(self):
        rng = np.random.default_rng(8)
        vmap = VoxelMap((rng.random((10, 10, 10)) < 0.05), resolution=0.1)
        a, b = rng.random((500, 3)), rng.random((500, 3))
        assert segments_collide(vmap, a, b).tolist() == segments_collide(vmap, b, a).tolist()
        for n in range(20):
            assert set(cells_on_segment(vmap, a[n], b[n])) == set(cells_on_segment(vmap, b[n], a[n]))


class TestAgainstDenseSampling:
    """Collision queries against sampling every resolution / 100 plus exact box distances.

    A sample inside a cell proves the segment meets it. A cell the sampling
    misses may still be touched, but then the segment lies within rounding of
    its closed box.
    """

    TOUCH = 1e-8

    @pytest.fixture(params=[0, 1, 2])
    def scene(self, request):
        rng = np.random.default_rng(100 + request.param)
        return VoxelMap((rng.random((10, 10, 10)) < 0.1), resolution=0.1), rng

    def test_segment_collides(self, scene):
        vmap, rng = scene
        occupied = np.argwhere(vmap.grid)
        a, b = rng.random((1000, 3)), rng.random((1000, 3))
        hits = segments_collide(vmap, a, b)
        for n in range(1000):
            sampled = any(vmap.is_occupied(c) for c in dense_cells(vmap, a[n], b[n]))
            if sampled:
                assert hits[n]
            if hits[n]:
                assert box_distances(vmap, occupied, a[n], b[n]).min() <= self.TOUCH

    def test_cells_on_segment(self, scene):
        vmap, rng = scene
        every = np.argwhere(np.ones(vmap.dims, dtype=bool))
        for _ in range(200):
            a, b = rng.random(3), rng.random(3)
            walked = set(cells_on_segment(vmap, a, b))
            sampled = dense_cells(vmap, a, b)
            assert sampled <= walked
            touching = {tuple(int(v) for v in c) for c in every[box_distances(vmap, every, a, b) <= self.TOUCH]}
            assert walked <= touching

    def test_segment_collides_examples(self):
        vmap = VoxelMap.from_cells((3, 3, 3), [(1, 1, 1)], resolution=1.0)
        through = ((0.5, 1.5, 1.5), (2.5, 1.5, 1.5))
        beside = ((0.5, 0.5, 0.5), (2.5, 0.5, 0.5))
        assert segment_collides(vmap, *through)
        assert (1, 1, 1) in dense_cells(vmap, *map(np.array, through))
        assert not segment_collides(vmap, *beside)
        assert (1, 1, 1) not in dense_cells(vmap, *map(np.array, beside))
