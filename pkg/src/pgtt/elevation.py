"""Robot-centric heightmaps, per-leg terrain statistics and hole in-painting.

Heightmap sample (r, c) sits at body-frame
``x = ((rows - 1) / 2 - r) * spacing`` (front to back) and
``y = ((cols - 1) / 2 - c) * spacing`` (left to right); flattening is
row-major, so the observation vector runs front row first, left column
first within a row. Lookups are nearest-cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from pgtt.grids import ElevationGrid, HeightField


class FootprintError(ValueError):
    pass


@dataclass(frozen=True)
class HeightmapSpec:
    rows: int = 11
    cols: int = 9
    spacing: float = 0.1

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("heightmap needs at least one row and column")
        if not self.spacing > 0.0:
            raise ValueError("spacing must be positive")

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def body_points(self) -> tuple[np.ndarray, np.ndarray]:
        r = np.arange(self.rows)[:, None]
        c = np.arange(self.cols)[None, :]
        x = ((self.rows - 1) / 2.0 - r) * self.spacing
        y = ((self.cols - 1) / 2.0 - c) * self.spacing
        return np.broadcast_to(x, (self.rows, self.cols)), np.broadcast_to(y, (self.rows, self.cols))


@dataclass(frozen=True)
class Pose2D:
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0


@dataclass(frozen=True, eq=False)
class RobotHeightmap:
    samples: np.ndarray  # world z, shape (rows, cols)
    base_pose: Pose2D
    clamped: bool = False
    degraded: bool = False

    def flat(self) -> np.ndarray:
        return self.samples.ravel(order="C")

    def relative(self, base_z: float) -> np.ndarray:
        """Flattened samples expressed relative to the base height."""
        return self.flat() - base_z


@dataclass(frozen=True)
class LegStats:
    h_max: float
    h_min: float

    @property
    def delta_h(self) -> float:
        return self.h_max - self.h_min


def footprint_world(pose: Pose2D, spec: HeightmapSpec) -> tuple[np.ndarray, np.ndarray]:
    bx, by = spec.body_points()
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    return pose.x + c * bx - s * by, pose.y + s * bx + c * by


def sample_robot_heightmap(field: HeightField, pose: Pose2D, spec: HeightmapSpec = HeightmapSpec(),
                           strict: bool = False) -> RobotHeightmap:
    wx, wy = footprint_world(pose, spec)
    row, col = field.cell_index(wx, wy)
    rows, cols = field.shape
    outside = (row < 0) | (row >= rows) | (col < 0) | (col >= cols)
    clamped = bool(outside.any())
    if clamped:
        if strict:
            raise FootprintError(f"heightmap footprint at {pose} leaves the height field")
        row = np.clip(row, 0, rows - 1)
        col = np.clip(col, 0, cols - 1)
    return RobotHeightmap(field.heights[row, col], pose, clamped=clamped)


def leg_local_stats(field: HeightField, foot_xy, window: float = 0.2) -> LegStats:
    """Max/min terrain height over cells centred inside a square window."""
    if not window > 0.0:
        raise ValueError("window must be positive")
    fx, fy = float(foot_xy[0]), float(foot_xy[1])
    half = window / 2.0
    res = field.resolution
    ox, oy = field.origin
    rows, cols = field.shape
    c0 = max(int(math.floor((fx - half - ox) / res)), 0)
    c1 = min(int(math.ceil((fx + half - ox) / res)), cols - 1)
    r0 = max(int(math.floor((fy - half - oy) / res)), 0)
    r1 = min(int(math.ceil((fy + half - oy) / res)), rows - 1)
    if c0 > c1 or r0 > r1:
        raise FootprintError(f"window around {foot_xy} lies outside the height field")
    xs = ox + np.arange(c0, c1 + 1) * res
    ys = oy + np.arange(r0, r1 + 1) * res
    in_x = np.abs(xs - fx) <= half
    in_y = np.abs(ys - fy) <= half
    if not (in_x.any() and in_y.any()):
        raise FootprintError(f"no cell centres inside the window around {foot_xy}")
    patch = field.heights[r0:r1 + 1, c0:c1 + 1][np.ix_(in_y, in_x)]
    return LegStats(float(patch.max()), float(patch.min()))


_EIGHT = np.ones((3, 3), dtype=bool)


def hole_components(valid: np.ndarray):
    """Label 8-connected holes; returns (labels, count, radius per label, border flag per label).

    A hole's radius is the largest chessboard distance from one of its cells
    to the nearest valid cell, so a single missing cell has radius 1 and a
    3x3 block radius 2.
    """
    invalid = ~valid
    labels, count = ndimage.label(invalid, structure=_EIGHT)
    if count == 0:
        return labels, 0, np.zeros(1, int), np.zeros(1, bool)
    if valid.any():
        dist = ndimage.distance_transform_cdt(invalid, metric="chessboard")
    else:
        dist = np.full(valid.shape, max(valid.shape))
    radius = np.zeros(count + 1, dtype=int)
    np.maximum.at(radius, labels.ravel(), dist.ravel())
    border = np.zeros(count + 1, dtype=bool)
    for edge in (labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]):
        border[edge] = True
    border[0] = False
    return labels, count, radius, border


def median_fill(grid: ElevationGrid, r_hole: int = 2) -> ElevationGrid:
    """In-paint small enclosed holes with the median of surrounding valid cells.

    A hole (8-connected group of invalid cells) is filled when it does not
    touch the grid border and its radius is at most ``r_hole``; every cell
    of it takes the median of the valid cells in its (2 r_hole + 1)^2 patch.
    Larger or border-touching holes stay invalid.
    """
    if r_hole < 1:
        raise ValueError("r_hole must be >= 1")
    valid = grid.valid
    labels, count, radius, border = hole_components(valid)
    if count == 0:
        return grid
    fillable = (radius <= r_hole) & ~border
    fillable[0] = False
    targets = np.argwhere(fillable[labels])
    mean = grid.mean.copy()
    var = grid.variance.copy()
    new_valid = valid.copy()
    rows, cols = valid.shape
    for r, c in targets:
        r0, r1 = max(r - r_hole, 0), min(r + r_hole + 1, rows)
        c0, c1 = max(c - r_hole, 0), min(c + r_hole + 1, cols)
        ok = valid[r0:r1, c0:c1]
        mean[r, c] = np.median(grid.mean[r0:r1, c0:c1][ok])
        var[r, c] = np.median(grid.variance[r0:r1, c0:c1][ok])
        new_valid[r, c] = True
    return ElevationGrid(mean, var, new_valid, grid.resolution, grid.origin)


def grid_to_heightmap(grid: ElevationGrid, pose: Pose2D, spec: HeightmapSpec = HeightmapSpec(),
                      fallback_z: float = 0.0) -> RobotHeightmap:
    """Sample cell means under the footprint.

    Samples that land on invalid or off-grid cells take ``fallback_z`` (the
    current ground estimate) and mark the map as degraded.
    """
    wx, wy = footprint_world(pose, spec)
    row, col = grid.cell_index(wx, wy)
    rows, cols = grid.shape
    inside = (row >= 0) & (row < rows) & (col >= 0) & (col < cols)
    rr, cc = np.clip(row, 0, rows - 1), np.clip(col, 0, cols - 1)
    ok = inside & grid.valid[rr, cc]
    if not ok.any():
        raise FootprintError(f"no valid elevation cells under the footprint at {pose}")
    samples = np.where(ok, grid.mean[rr, cc], fallback_z)
    return RobotHeightmap(samples, pose, clamped=not bool(inside.all()), degraded=not bool(ok.all()))
