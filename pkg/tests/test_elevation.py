import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import bfs_holes, reference_median_fill
from pgtt.elevation import (FootprintError, HeightmapSpec, Pose2D, grid_to_heightmap,
                            hole_components, leg_local_stats, median_fill,
                            sample_robot_heightmap)
from pgtt.grids import ElevationGrid, HeightField


def east_stair(h=0.08, w=0.3, res=0.05, n_cells=200):
    """Field ascending eastwards by ``h`` every ``w`` metres, centred on the origin."""
    origin = -n_cells * res / 2 + res / 2
    xs = origin + np.arange(n_cells) * res
    row = np.floor((xs - origin + res / 2) / w) * h
    return HeightField(np.tile(row, (n_cells, 1)), res, (origin, origin))


class TestSpec:
    def test_deployment_footprint(self):
        spec = HeightmapSpec()
        bx, by = spec.body_points()
        assert spec.size == 99
        assert bx.max() - bx.min() == pytest.approx(1.0)
        assert by.max() - by.min() == pytest.approx(0.8)
        # row 0 is the front row, column 0 the leftmost column
        assert bx[0, 0] == pytest.approx(0.5) and by[0, 0] == pytest.approx(0.4)

    def test_invalid(self):
        with pytest.raises(ValueError):
            HeightmapSpec(spacing=0.0)
        with pytest.raises(ValueError):
            HeightmapSpec(rows=0)


class TestSampling:
    def test_flat_field(self):
        field = HeightField(np.zeros((60, 60)), 0.05, (-1.475, -1.475))
        hm = sample_robot_heightmap(field, Pose2D(0.1, -0.2, 1.0))
        assert hm.samples.shape == (11, 9) and np.all(hm.samples == 0.0)
        assert not hm.clamped

    def test_yaw_zero_reads_ascent_along_rows(self):
        field = east_stair()
        hm = sample_robot_heightmap(field, Pose2D(0.0, 0.0, 0.0), HeightmapSpec(5, 5, 0.1))
        # front rows are further east, hence higher
        assert np.all(np.diff(hm.samples[:, 0]) <= 0)
        assert np.all(hm.samples == hm.samples[:, :1])

    def test_quarter_turn_rotates_map(self):
        field = east_stair()
        spec = HeightmapSpec(9, 9, 0.1)
        pose = Pose2D(0.013, 0.021, 0.0)
        m0 = sample_robot_heightmap(field, pose, spec).samples
        m90 = sample_robot_heightmap(field, Pose2D(pose.x, pose.y, math.pi / 2), spec).samples
        assert np.array_equal(m90, np.rot90(m0, k=-1))

    def test_matches_direct_lookup(self):
        rng = np.random.default_rng(0)
        field = HeightField(rng.uniform(0, 1, (80, 80)), 0.05, (-2.0, -2.0))
        spec = HeightmapSpec()
        for _ in range(20):
            pose = Pose2D(*rng.uniform(-0.5, 0.5, 2), rng.uniform(-math.pi, math.pi))
            hm = sample_robot_heightmap(field, pose, spec)
            bx, by = spec.body_points()
            c, s = math.cos(pose.yaw), math.sin(pose.yaw)
            for r in range(spec.rows):
                for k in range(spec.cols):
                    wx = pose.x + c * bx[r, k] - s * by[r, k]
                    wy = pose.y + s * bx[r, k] + c * by[r, k]
                    assert hm.samples[r, k] == field.height_at(wx, wy)

    def test_out_of_bounds(self):
        field = HeightField(np.ones((10, 10)), 0.1, (0.0, 0.0))
        hm = sample_robot_heightmap(field, Pose2D(0.2, 0.2, 0.0))
        assert hm.clamped and np.all(hm.samples == 1.0)
        with pytest.raises(FootprintError):
            sample_robot_heightmap(field, Pose2D(0.2, 0.2, 0.0), strict=True)

    def test_flatten_is_row_major_and_relative(self):
        field = HeightField(np.arange(400.0).reshape(20, 20) * 0.01, 0.1, (-1.0, -1.0))
        hm = sample_robot_heightmap(field, Pose2D(0.0, 0.0, 0.3), HeightmapSpec(3, 3, 0.1))
        assert np.array_equal(hm.flat(), hm.samples.reshape(-1))
        assert np.allclose(hm.relative(0.5), hm.samples.reshape(-1) - 0.5)

    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
    @settings(max_examples=50)
    def test_translation_by_stair_period(self, x, y):
        # the field repeats every 0.3 m eastwards (up to a constant), so the map does too
        field = east_stair(w=0.3, res=0.05, n_cells=200)
        spec = HeightmapSpec(5, 5, 0.1)
        a = sample_robot_heightmap(field, Pose2D(x, y, 0.0), spec).samples
        b = sample_robot_heightmap(field, Pose2D(x + 0.3, y, 0.0), spec).samples
        d = b - a
        # nearest-cell rounding may move one sample by a single cell
        assert np.median(d) == pytest.approx(0.08)
        assert np.all((np.abs(d - 0.08) < 1e-9) | (np.abs(d) < 1e-9) | (np.abs(d - 0.16) < 1e-9))


class TestLegStats:
    def test_flat(self):
        field = HeightField(np.full((20, 20), 0.3), 0.05, (0, 0))
        s = leg_local_stats(field, (0.5, 0.5), 0.2)
        assert s.delta_h == 0.0 and s.h_max == 0.3

    def test_straddling_step(self):
        field = east_stair(h=0.08, w=0.3)
        # centre the window on a riser between two cell centres
        xs, _ = field.cell_centers()
        z = field.heights[0]
        edge = np.flatnonzero(np.diff(z) > 0)[len(z) // 20]
        foot = ((xs[edge] + xs[edge + 1]) / 2, 0.0)
        assert leg_local_stats(field, foot, 0.2).delta_h == pytest.approx(0.08)

    def test_inside_tread(self):
        field = east_stair(h=0.08, w=0.3)
        xs, _ = field.cell_centers()
        z = field.heights[0]
        edge = np.flatnonzero(np.diff(z) > 0)[5]
        foot = (xs[edge + 3] + 0.01, 0.0)
        assert leg_local_stats(field, foot, 0.1).delta_h == 0.0

    def test_inclusive_window_against_enumeration(self):
        rng = np.random.default_rng(2)
        field = HeightField(rng.uniform(0, 1, (30, 30)), 0.1, (0.0, 0.0))
        xs, ys = field.cell_centers()
        for _ in range(200):
            foot = rng.uniform(0.3, 2.6, 2)
            win = rng.uniform(0.05, 0.6)
            inside = [(r, c) for r in range(30) for c in range(30)
                      if abs(xs[c] - foot[0]) <= win / 2 and abs(ys[r] - foot[1]) <= win / 2]
            if not inside:
                continue
            vals = [field.heights[r, c] for r, c in inside]
            s = leg_local_stats(field, foot, win)
            assert (s.h_max, s.h_min) == (max(vals), min(vals))

    @given(st.floats(0.1, 0.4), st.floats(0.0, 0.4))
    @settings(max_examples=50)
    def test_monotone_in_window(self, win, extra):
        rng = np.random.default_rng(7)
        field = HeightField(rng.uniform(0, 1, (30, 30)), 0.1, (0.0, 0.0))
        a = leg_local_stats(field, (1.43, 1.57), win)
        b = leg_local_stats(field, (1.43, 1.57), win + extra)
        assert b.delta_h >= a.delta_h

    def test_off_field(self):
        field = HeightField(np.zeros((10, 10)), 0.1, (0.0, 0.0))
        with pytest.raises(FootprintError):
            leg_local_stats(field, (5.0, 5.0), 0.2)
        with pytest.raises(ValueError):
            leg_local_stats(field, (0.5, 0.5), 0.0)


def make_grid(mean, valid):
    return ElevationGrid(mean, np.full(mean.shape, 0.01), valid, 0.1, (0.0, 0.0))


@st.composite
def holey_grids(draw):
    rows = draw(st.integers(3, 14))
    cols = draw(st.integers(3, 14))
    mean = draw(arrays(np.float64, (rows, cols), elements=st.floats(-1.0, 1.0)))
    valid = np.ones((rows, cols), bool)
    holes = draw(st.lists(st.tuples(st.integers(0, rows - 1), st.integers(0, cols - 1),
                                     st.integers(1, 5), st.integers(1, 5)), max_size=4))
    for r, c, h, w in holes:
        valid[r:r + h, c:c + w] = False
    return make_grid(mean, valid)


class TestMedianFill:
    def test_no_holes_identity(self):
        g = make_grid(np.arange(25.0).reshape(5, 5), np.ones((5, 5), bool))
        out = median_fill(g, 2)
        assert np.array_equal(out.mean, g.mean) and out.valid.all()

    def test_single_cell(self):
        mean = np.full((5, 5), 0.1)
        valid = np.ones((5, 5), bool)
        valid[2, 2] = False
        out = median_fill(make_grid(mean, valid), 1)
        assert out.valid.all() and out.mean[2, 2] == 0.1

    def test_large_region_untouched(self):
        mean = np.zeros((20, 20))
        valid = np.ones((20, 20), bool)
        valid[5:15, 5:15] = False
        g = make_grid(mean, valid)
        out = median_fill(g, 2)
        assert np.array_equal(out.valid, valid)

    def test_border_hole_untouched(self):
        valid = np.ones((6, 6), bool)
        valid[0, 2] = False
        out = median_fill(make_grid(np.zeros((6, 6)), valid), 2)
        assert not out.valid[0, 2]

    def test_radius_definition(self):
        valid = np.ones((9, 9), bool)
        valid[3:6, 3:6] = False
        _, count, radius, border = hole_components(valid)
        assert count == 1 and radius[1] == 2 and not border[1]
        assert median_fill(make_grid(np.zeros((9, 9)), valid), 1).valid.sum() == 72
        assert median_fill(make_grid(np.zeros((9, 9)), valid), 2).valid.all()

    def test_diagonal_cells_form_one_hole(self):
        valid = np.ones((8, 8), bool)
        valid[2, 2] = valid[3, 3] = False
        _, count, radius, _ = hole_components(valid)
        assert count == 1 and radius[1] == 1

    def test_median_of_neighbours(self):
        mean = np.arange(49.0).reshape(7, 7)
        valid = np.ones((7, 7), bool)
        valid[3, 3] = False
        out = median_fill(make_grid(mean, valid), 1)
        nb = [mean[r, c] for r in range(2, 5) for c in range(2, 5) if (r, c) != (3, 3)]
        assert out.mean[3, 3] == np.median(nb)

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            median_fill(make_grid(np.zeros((3, 3)), np.ones((3, 3), bool)), 0)

    @given(holey_grids(), st.integers(1, 3))
    def test_matches_bfs_oracle(self, g, r_hole):
        out = median_fill(g, r_hole)
        ref_mean, ref_valid = reference_median_fill(g.mean.tolist(), g.valid.tolist(), r_hole)
        assert np.array_equal(out.valid, np.array(ref_valid))
        ref_mean = np.array(ref_mean)
        assert np.allclose(out.mean[out.valid], ref_mean[out.valid], rtol=0, atol=1e-12)

    @given(holey_grids(), st.integers(1, 3))
    def test_contract(self, g, r_hole):
        once = median_fill(g, r_hole)
        twice = median_fill(once, r_hole)
        assert np.array_equal(once.valid, twice.valid)
        assert np.array_equal(once.mean[once.valid], twice.mean[twice.valid])
        assert np.array_equal(once.mean[g.valid], g.mean[g.valid])
        assert np.array_equal(once.variance[g.valid], g.variance[g.valid])
        assert np.all(once.valid[g.valid])
        filled = once.valid & ~g.valid
        for cells, radius, border in bfs_holes(g.valid.tolist()):
            state = {bool(filled[i, j]) for i, j in cells}
            assert state == {(radius <= r_hole and not border)}


class TestGridToHeightmap:
    def test_flat_valid(self):
        g = make_grid(np.zeros((40, 40)), np.ones((40, 40), bool))
        hm = grid_to_heightmap(g, Pose2D(2.0, 2.0, 0.4))
        assert np.all(hm.samples == 0.0) and not hm.degraded

    def test_hole_falls_back(self):
        field = HeightField(np.full((40, 40), 0.2), 0.1, (0.0, 0.0))
        valid = np.ones((40, 40), bool)
        row, col = field.cell_index(2.0, 2.0)
        valid[row, col] = False
        g = make_grid(field.heights, valid)
        hm = grid_to_heightmap(g, Pose2D(2.0, 2.0, 0.0), fallback_z=-7.0)
        assert hm.degraded
        assert hm.samples[5, 4] == -7.0
        assert np.sum(hm.samples == -7.0) == 1

    def test_cross_path_equivalence(self):
        rng = np.random.default_rng(4)
        field = HeightField(rng.uniform(0, 0.5, (60, 60)), 0.05, (-1.5, -1.5))
        g = ElevationGrid.from_heightfield(field)
        for _ in range(30):
            pose = Pose2D(*rng.uniform(-0.6, 0.6, 2), rng.uniform(-3, 3))
            a = grid_to_heightmap(g, pose).samples
            b = sample_robot_heightmap(field, pose).samples
            assert np.array_equal(a, b)

    def test_fully_invalid(self):
        g = make_grid(np.zeros((30, 30)), np.zeros((30, 30), bool))
        with pytest.raises(FootprintError):
            grid_to_heightmap(g, Pose2D(1.5, 1.5, 0.0))
