"""Regular height grids and their on-disk formats.

Binary layout (all little-endian)::

    offset  size  field
    0       4     magic  b"PGHF" (HeightField) or b"PGEG" (ElevationGrid)
    4       4     uint32 version (1)
    8       4     uint32 rows
    12      4     uint32 cols
    16      8     float64 resolution [m/cell]
    24      8     float64 origin_x  [m] world x of cell (0, 0) centre
    32      8     float64 origin_y  [m]
    40      ...   float32 heights, row-major (rows x cols)

An ElevationGrid carries three planes after the header: float32 means,
float32 variances, then the validity mask packed one bit per cell
(row-major, least significant bit first). Row index grows with world y,
column index with world x.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HEIGHTFIELD_MAGIC = b"PGHF"
ELEVATION_MAGIC = b"PGEG"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")
HEADER_SIZE = _HEADER.size


class GridFormatError(ValueError):
    """Malformed grid file; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True, eq=False)
class HeightField:
    heights: np.ndarray
    resolution: float
    origin: tuple[float, float]

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=float)
        if h.ndim != 2:
            raise ValueError(f"heights must be 2-D, got shape {h.shape}")
        if not self.resolution > 0.0:
            raise ValueError("resolution must be positive")
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return self.heights.shape

    def cell_index(self, x, y):
        """Nearest cell (row, col) for world coordinates; unbounded."""
        col = np.floor((np.asarray(x) - self.origin[0]) / self.resolution + 0.5).astype(int)
        row = np.floor((np.asarray(y) - self.origin[1]) / self.resolution + 0.5).astype(int)
        return row, col

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        rows, cols = self.shape
        xs = self.origin[0] + np.arange(cols) * self.resolution
        ys = self.origin[1] + np.arange(rows) * self.resolution
        return xs, ys

    def contains(self, x, y):
        row, col = self.cell_index(x, y)
        rows, cols = self.shape
        return (row >= 0) & (row < rows) & (col >= 0) & (col < cols)

    def height_at(self, x: float, y: float) -> float:
        row, col = self.cell_index(x, y)
        rows, cols = self.shape
        if not (0 <= row < rows and 0 <= col < cols):
            raise IndexError(f"point ({x}, {y}) outside the height field")
        return float(self.heights[row, col])

    def to_bytes(self) -> bytes:
        rows, cols = self.shape
        header = _HEADER.pack(HEIGHTFIELD_MAGIC, FORMAT_VERSION, rows, cols,
                              self.resolution, *self.origin)
        return header + self.heights.astype("<f4").tobytes(order="C")

    @classmethod
    def from_bytes(cls, data: bytes) -> "HeightField":
        rows, cols, res, origin = _read_header(data, HEIGHTFIELD_MAGIC)
        heights = _read_plane(data, HEADER_SIZE, rows, cols, "heights")
        _check_trailing(data, HEADER_SIZE + 4 * rows * cols)
        bad = ~np.isfinite(heights)
        if bad.any():
            idx = int(np.flatnonzero(bad.ravel())[0])
            raise GridFormatError("non-finite height", HEADER_SIZE + 4 * idx)
        return cls(heights, res, origin)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "HeightField":
        return cls.from_bytes(Path(path).read_bytes())

    def save_csv(self, path) -> None:
        np.savetxt(path, self.heights, delimiter=",", fmt="%.6f")


@dataclass(frozen=True, eq=False)
class ElevationGrid:
    """World-frame elevation map: per-cell mean, variance and validity."""

    mean: np.ndarray
    variance: np.ndarray
    valid: np.ndarray
    resolution: float
    origin: tuple[float, float]

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        var = np.array(self.variance, dtype=float)
        valid = np.array(self.valid, dtype=bool)
        if not (mean.shape == var.shape == valid.shape) or mean.ndim != 2:
            raise ValueError("mean, variance and valid must be 2-D arrays of equal shape")
        if np.any(var[valid] < 0.0):
            raise ValueError("variance must be non-negative on valid cells")
        # holes carry NaN so they can never be read as a height by accident
        mean[~valid] = np.nan
        var[~valid] = np.nan
        for a in (mean, var, valid):
            a.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", var)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return self.mean.shape

    @classmethod
    def from_heightfield(cls, field: HeightField, variance: float = 0.0) -> "ElevationGrid":
        h = field.heights
        return cls(h, np.full(h.shape, variance), np.ones(h.shape, bool),
                   field.resolution, field.origin)

    def cell_index(self, x, y):
        col = np.floor((np.asarray(x) - self.origin[0]) / self.resolution + 0.5).astype(int)
        row = np.floor((np.asarray(y) - self.origin[1]) / self.resolution + 0.5).astype(int)
        return row, col

    def to_bytes(self) -> bytes:
        rows, cols = self.shape
        header = _HEADER.pack(ELEVATION_MAGIC, FORMAT_VERSION, rows, cols,
                              self.resolution, *self.origin)
        mask = np.packbits(self.valid.ravel(order="C"), bitorder="little")
        return (header + self.mean.astype("<f4").tobytes(order="C")
                + self.variance.astype("<f4").tobytes(order="C") + mask.tobytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "ElevationGrid":
        rows, cols, res, origin = _read_header(data, ELEVATION_MAGIC)
        n = rows * cols
        mean = _read_plane(data, HEADER_SIZE, rows, cols, "mean")
        var = _read_plane(data, HEADER_SIZE + 4 * n, rows, cols, "variance")
        mask_off = HEADER_SIZE + 8 * n
        nbytes = (n + 7) // 8
        if len(data) < mask_off + nbytes:
            raise GridFormatError("truncated validity mask", len(data))
        bits = np.frombuffer(data, np.uint8, nbytes, mask_off)
        valid = np.unpackbits(bits, count=n, bitorder="little").astype(bool).reshape(rows, cols)
        _check_trailing(data, mask_off + nbytes)
        bad = valid & ~np.isfinite(mean)
        if bad.any():
            idx = int(np.flatnonzero(bad.ravel())[0])
            raise GridFormatError("valid cell with non-finite mean", HEADER_SIZE + 4 * idx)
        return cls(mean, var, valid, res, origin)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "ElevationGrid":
        return cls.from_bytes(Path(path).read_bytes())


def _read_header(data: bytes, magic: bytes):
    if len(data) < HEADER_SIZE:
        raise GridFormatError(f"file too short for header ({len(data)} < {HEADER_SIZE} bytes)",
                              len(data))
    got, version, rows, cols, res, ox, oy = _HEADER.unpack_from(data, 0)
    if got != magic:
        raise GridFormatError(f"bad magic {got!r}, expected {magic!r}", 0)
    if version != FORMAT_VERSION:
        raise GridFormatError(f"unsupported version {version}", 4)
    if rows == 0 or cols == 0:
        raise GridFormatError(f"empty grid {rows}x{cols}", 8)
    if not (np.isfinite(res) and res > 0.0):
        raise GridFormatError(f"invalid resolution {res}", 16)
    if not (np.isfinite(ox) and np.isfinite(oy)):
        raise GridFormatError("non-finite origin", 24)
    return rows, cols, res, (ox, oy)


def _read_plane(data: bytes, offset: int, rows: int, cols: int, name: str) -> np.ndarray:
    n = rows * cols
    if len(data) < offset + 4 * n:
        raise GridFormatError(f"truncated {name} plane: need {4 * n} bytes", len(data))
    plane = np.frombuffer(data, "<f4", n, offset).astype(float).reshape(rows, cols)
    return plane


def _check_trailing(data: bytes, end: int) -> None:
    if len(data) != end:
        raise GridFormatError(f"{len(data) - end} unexpected trailing bytes", end)
