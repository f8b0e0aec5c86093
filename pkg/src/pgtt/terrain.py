"""Stair-like terrain from wave function collapse over architectural tiles.

A terrain is a (2N+1) x (2N+1) grid of square tiles. Tile kinds are flat
floors, straight stair runs and L-shaped corner runs; the robot spawns on
the centre tile, which is always flat at elevation zero. Every stair in a
grid shares one sampled (step width, step height, step count), and tile
elevations are whole multiples of the per-tile rise, so all heights are an
integer number of steps times the step height and shared edges can be
compared exactly.

Conventions: grid row index grows northwards (+y), column index eastwards
(+x). Directions are 0=E, 1=N, 2=W, 3=S; a tile's orientation is the
number of quarter turns (CCW) from its canonical pose. A straight stair
with orientation ``o`` ascends toward direction ``o``. Edge profiles are
parameterised by increasing x on N/S edges and increasing y on E/W edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from pgtt.grids import HeightField

EAST, NORTH, WEST, SOUTH = range(4)
DIRECTION_NAMES = "ENWS"
# (d_row, d_col) for each direction
DIRECTION_OFFSETS = ((0, 1), (1, 0), (0, -1), (-1, 0))
CORNER_NAMES = ("NE", "NW", "SW", "SE")


def opposite(d: int) -> int:
    return (d + 2) % 4


class TileKind(str, Enum):
    FLAT = "flat"
    STAIR_STRAIGHT = "stair_straight"
    STAIR_CORNER = "stair_corner"


class GenerationError(RuntimeError):
    def __init__(self, message: str, seed: int):
        super().__init__(f"{message} (seed={seed})")
        self.seed = seed


@dataclass(frozen=True)
class Tile:
    kind: TileKind
    orientation: int
    base_steps: int
    step_height: float
    step_width: float = 0.0
    step_count: int = 0

    def __post_init__(self):
        if self.orientation not in (0, 1, 2, 3):
            raise ValueError(f"orientation must be 0..3, got {self.orientation}")
        if self.kind is TileKind.FLAT:
            if self.orientation != 0 or self.step_count != 0:
                raise ValueError("flat tiles have orientation 0 and no steps")
        elif self.step_count < 1 or not self.step_width > 0.0:
            raise ValueError("stair tiles need step_count >= 1 and step_width > 0")

    @classmethod
    def flat(cls, base_steps: int, step_height: float) -> "Tile":
        return cls(TileKind.FLAT, 0, base_steps, step_height)

    @property
    def base_elevation(self) -> float:
        return self.base_steps * self.step_height

    @property
    def rise(self) -> float:
        return self.step_count * self.step_height

    @property
    def top_elevation(self) -> float:
        return (self.base_steps + self.step_count) * self.step_height


def _canonical_profile(tile: Tile, side: int):
    """Edge profile of ``tile`` in orientation 0."""
    top = ("const", tile.top_elevation)
    base = ("const", tile.base_elevation)
    ramp = ("ramp", tile.base_elevation, 1, tile.step_count, tile.step_width, tile.step_height)
    if tile.kind is TileKind.STAIR_STRAIGHT:
        return {EAST: top, WEST: base, NORTH: ramp, SOUTH: ramp}[side]
    return {EAST: top, NORTH: top, WEST: ramp, SOUTH: ramp}[side]


def edge_profile(tile: Tile, side: int) -> tuple:
    """Height profile along one tile edge.

    ``("const", z)`` for a level edge, or ``("ramp", base_z, sign, n, w, h)``
    for an edge that cuts a stair run; ``sign`` is +1 when the run ascends
    with the edge coordinate.
    """
    if tile.kind is TileKind.FLAT:
        return ("const", tile.base_elevation)
    side_c = (side - tile.orientation) % 4
    prof = _canonical_profile(tile, side_c)
    if prof[0] == "const":
        return prof
    sign = prof[2]
    s = side_c
    for _ in range(tile.orientation):
        # a quarter turn maps E->N and W->S with the edge coordinate reversed
        if s % 2 == 0:
            sign = -sign
        s = (s + 1) % 4
    return (prof[0], prof[1], sign) + prof[3:]


def tiles_compatible(a: Tile, b: Tile, direction: int) -> bool:
    """Can ``b`` sit on the ``direction`` side of ``a``?"""
    return edge_profile(a, direction) == edge_profile(b, opposite(direction))


@dataclass(frozen=True)
class TerrainParams:
    step_width_range: tuple[float, float] = (0.30, 0.45)
    step_height_range: tuple[float, float] = (0.01, 0.03)
    step_count_range: tuple[int, int] = (2, 4)
    grid_half_size: int = 2
    tile_size: float = 2.0
    flat_weight: float = 1.0
    straight_weight: float = 1.0
    corner_weight: float = 0.5
    max_restarts: int = 32

    def __post_init__(self):
        w_lo, w_hi = self.step_width_range
        h_lo, h_hi = self.step_height_range
        n_lo, n_hi = self.step_count_range
        if not 0.0 < w_lo <= w_hi:
            raise ValueError(f"invalid step_width_range {self.step_width_range}")
        if not 0.0 <= h_lo <= h_hi:
            raise ValueError(f"invalid step_height_range {self.step_height_range}")
        if not 1 <= n_lo <= n_hi or int(n_lo) != n_lo or int(n_hi) != n_hi:
            raise ValueError(f"invalid step_count_range {self.step_count_range}")
        if self.grid_half_size < 1:
            raise ValueError("grid_half_size must be >= 1")
        if n_hi * w_hi > self.tile_size:
            raise ValueError(f"{n_hi} steps of width {w_hi} do not fit in a "
                             f"{self.tile_size} m tile")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be >= 0")
        for name in ("flat_weight", "straight_weight", "corner_weight"):
            if not 0.0 <= getattr(self, name) < float("inf"):
                raise ValueError(f"{name} must be finite and >= 0")


@dataclass(frozen=True)
class TileSet:
    tiles: tuple[Tile, ...]
    # compat[d][i]: bitmask of tiles allowed on side d of tile i
    compat: tuple[tuple[int, ...], ...]
    weights: tuple[float, ...]
    step_height: float
    step_width: float
    step_count: int
    tile_size: float

    def __post_init__(self):
        if not self.tiles:
            raise ValueError("tile set is empty")

    @property
    def center_index(self) -> int:
        for i, t in enumerate(self.tiles):
            if t.kind is TileKind.FLAT and t.base_steps == 0:
                return i
        raise ValueError("tile set has no flat tile at elevation 0")

    def allowed(self, i: int, j: int, direction: int) -> bool:
        return bool(self.compat[direction][i] >> j & 1)


def make_tileset(tiles, weights=None, tile_size: float = 2.0) -> TileSet:
    tiles = tuple(tiles)
    if weights is None:
        weights = (1.0,) * len(tiles)
    if len(weights) != len(tiles) or not all(0.0 <= w < float("inf") for w in weights):
        raise ValueError("need one finite non-negative weight per tile")
    profiles = [[edge_profile(t, d) for d in range(4)] for t in tiles]
    compat = []
    for d in range(4):
        # tiles keyed by the profile they present toward a neighbour on side d
        facing: dict[tuple, int] = {}
        for j, prof in enumerate(profiles):
            key = prof[opposite(d)]
            facing[key] = facing.get(key, 0) | 1 << j
        compat.append(tuple(facing.get(prof[d], 0) for prof in profiles))
    compat = tuple(compat)
    stair = next((t for t in tiles if t.kind is not TileKind.FLAT), None)
    h = tiles[0].step_height if tiles else 0.0
    return TileSet(tiles, compat, tuple(float(w) for w in weights), h,
                   stair.step_width if stair else 0.0, stair.step_count if stair else 0,
                   tile_size)


def build_tileset(params: TerrainParams, rng: np.random.Generator) -> TileSet:
    """Sample the stair geometry and enumerate every tile variant.

    Elevation levels run from 0 to 2N, the most a tile can climb from the
    flat centre. With a zero step height only the flat ground tile remains.
    """
    w = float(rng.uniform(*params.step_width_range))
    h = float(rng.uniform(*params.step_height_range))
    n_lo, n_hi = params.step_count_range
    n = int(rng.integers(n_lo, n_hi + 1))
    if h == 0.0:
        return make_tileset([Tile.flat(0, 0.0)], [params.flat_weight], params.tile_size)
    levels = 2 * params.grid_half_size
    tiles, weights = [], []
    for k in range(levels + 1):
        tiles.append(Tile.flat(k * n, h))
        weights.append(params.flat_weight)
    for kind, wt in ((TileKind.STAIR_STRAIGHT, params.straight_weight),
                     (TileKind.STAIR_CORNER, params.corner_weight)):
        for k in range(levels):
            for o in range(4):
                tiles.append(Tile(kind, o, k * n, h, w, n))
                weights.append(wt)
    return make_tileset(tiles, weights, params.tile_size)


@dataclass(frozen=True, eq=False)
class TileGrid:
    tileset: TileSet
    half_size: int
    cells: tuple[tuple[int, ...], ...]  # tile indices, [row][col]
    seed: int
    attempts: int = 1

    @property
    def size(self) -> int:
        return 2 * self.half_size + 1

    def tile(self, row: int, col: int) -> Tile:
        return self.tileset.tiles[self.cells[row][col]]

    def tile_counts(self) -> dict[str, int]:
        counts = {k.value: 0 for k in TileKind}
        for row in self.cells:
            for i in row:
                counts[self.tileset.tiles[i].kind.value] += 1
        return counts

    def adjacency_violations(self) -> list[tuple[int, int, int]]:
        """Every (row, col, direction) whose E or N neighbour mismatches."""
        bad = []
        for r in range(self.size):
            for c in range(self.size):
                for d in (EAST, NORTH):
                    dr, dc = DIRECTION_OFFSETS[d]
                    rr, cc = r + dr, c + dc
                    if rr < self.size and cc < self.size:
                        if not tiles_compatible(self.tile(r, c), self.tile(rr, cc), d):
                            bad.append((r, c, d))
        return bad

    def to_text(self) -> str:
        ts = self.tileset
        lines = [
            "# pgtt tile grid v1",
            "# rows listed north to south; F<lvl> flat, S<dir><lvl> straight stair "
            "ascending toward <dir>, C<dirs><lvl> corner stair ascending toward <dirs>",
            f"seed {self.seed}",
            f"half_size {self.half_size}",
            f"tile_size {ts.tile_size!r}",
            f"step_height {ts.step_height!r}",
            f"step_width {ts.step_width!r}",
            f"step_count {ts.step_count}",
            f"attempts {self.attempts}",
        ]
        for r in reversed(range(self.size)):
            lines.append(f"row {r}: " + " ".join(_tile_token(self.tile(r, c), ts)
                                                 for c in range(self.size)))
        return "\n".join(lines) + "\n"


def _tile_token(t: Tile, ts: TileSet) -> str:
    level = t.base_steps // ts.step_count if ts.step_count else 0
    if t.kind is TileKind.FLAT:
        return f"F{level}"
    if t.kind is TileKind.STAIR_STRAIGHT:
        return f"S{DIRECTION_NAMES[t.orientation]}{level}"
    return f"C{CORNER_NAMES[t.orientation]}{level}"


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Solver:
    def __init__(self, tileset: TileSet, size: int):
        self.ts = tileset
        self.size = size
        # zero-weight tiles are never drawn, so they start outside every domain
        self.full = sum(1 << i for i, w in enumerate(tileset.weights) if w > 0.0)
        self._support = [dict() for _ in range(4)]
        self.neighbors = []
        for cell in range(size * size):
            r, c = divmod(cell, size)
            nbs = []
            for d, (dr, dc) in enumerate(DIRECTION_OFFSETS):
                rr, cc = r + dr, c + dc
                if 0 <= rr < size and 0 <= cc < size:
                    nbs.append((d, rr * size + cc))
            self.neighbors.append(nbs)

    def support(self, d: int, mask: int) -> int:
        cache = self._support[d]
        s = cache.get(mask)
        if s is None:
            compat = self.ts.compat[d]
            s = 0
            for i in _bits(mask):
                s |= compat[i]
            cache[mask] = s
        return s

    def propagate(self, dom: list[int], start: int) -> bool:
        stack = [start]
        while stack:
            cell = stack.pop()
            for d, nb in self.neighbors[cell]:
                new = dom[nb] & self.support(d, dom[cell])
                if not new:
                    return False
                if new != dom[nb]:
                    dom[nb] = new
                    stack.append(nb)
        return True

    def attempt(self, center_cell: int, center_tile: int, rng: np.random.Generator):
        dom = [self.full] * (self.size * self.size)
        dom[center_cell] = 1 << center_tile
        if not self.propagate(dom, center_cell):
            return None
        weights = self.ts.weights
        while True:
            best, cands = None, []
            for cell, m in enumerate(dom):
                k = m.bit_count()
                if k > 1:
                    if best is None or k < best:
                        best, cands = k, [cell]
                    elif k == best:
                        cands.append(cell)
            if not cands:
                return [m.bit_length() - 1 for m in dom]
            cell = cands[int(rng.integers(len(cands)))] if len(cands) > 1 else cands[0]
            options = list(_bits(dom[cell]))
            p = np.array([weights[i] for i in options])
            choice = options[int(rng.choice(len(options), p=p / p.sum()))]
            dom[cell] = 1 << choice
            if not self.propagate(dom, cell):
                return None


def wfc_generate(tileset: TileSet, half_size: int, seed: int,
                 max_restarts: int = 32) -> TileGrid:
    """Collapse a (2N+1)^2 grid with the centre forced to flat ground.

    Cells are observed in minimum-entropy order (fewest remaining tiles,
    ties broken at random); contradictions trigger a full restart from a
    fresh sub-seed.
    """
    if half_size < 1:
        raise ValueError("half_size must be >= 1")
    size = 2 * half_size + 1
    solver = _Solver(tileset, size)
    center_cell = half_size * size + half_size
    center_tile = tileset.center_index
    for attempt in range(max_restarts + 1):
        rng = np.random.default_rng([seed, 1, attempt])
        flat = solver.attempt(center_cell, center_tile, rng)
        if flat is not None:
            cells = tuple(tuple(flat[r * size:(r + 1) * size]) for r in range(size))
            return TileGrid(tileset, half_size, cells, seed, attempt + 1)
    raise GenerationError(f"wave function collapse failed after {max_restarts} restarts", seed)


def _stair_steps(s: np.ndarray, t: Tile, tile_size: float) -> np.ndarray:
    # risers at s0 + k*w for k = 0..n-1, run centred in the tile
    n, w = t.step_count, t.step_width
    s0 = (tile_size - (n - 1) * w) / 2.0
    return np.clip(np.floor((s - s0) / w).astype(int) + 1, 0, n)


def tile_steps(t: Tile, u: np.ndarray, v: np.ndarray, tile_size: float) -> np.ndarray:
    """Integer step count above zero at local tile coordinates (u east, v north)."""
    L = tile_size
    if t.kind is TileKind.FLAT:
        return np.full(np.broadcast(u, v).shape, t.base_steps)
    if t.kind is TileKind.STAIR_STRAIGHT:
        s = (u, v, L - u, L - v)[t.orientation]
    else:
        s = (np.maximum(u, v), np.maximum(v, L - u),
             np.maximum(L - u, L - v), np.maximum(L - v, u))[t.orientation]
    return t.base_steps + _stair_steps(s, t, L)


def cells_per_tile(tile_size: float, resolution: float) -> int:
    if not resolution > 0.0:
        raise ValueError("resolution must be positive")
    k = int(round(tile_size / resolution))
    if k < 1 or abs(k * resolution - tile_size) > 1e-9 * tile_size:
        raise ValueError(f"resolution {resolution} does not divide tile size {tile_size}")
    return k


def rasterize(grid: TileGrid, resolution: float = 0.05) -> HeightField:
    """Sample every tile's height function at cell centres.

    The field is centred on the spawn tile: world (0, 0) is the middle of
    tile (N, N).
    """
    ts = grid.tileset
    L = ts.tile_size
    k = cells_per_tile(L, resolution)
    centers = (np.arange(k) + 0.5) * resolution
    U, V = np.meshgrid(centers, centers)
    size = grid.size
    steps = np.empty((size * k, size * k), dtype=np.int64)
    cache: dict[int, np.ndarray] = {}
    for r in range(size):
        for c in range(size):
            idx = grid.cells[r][c]
            block = cache.get(idx)
            if block is None:
                block = cache[idx] = tile_steps(ts.tiles[idx], U, V, L)
            steps[r * k:(r + 1) * k, c * k:(c + 1) * k] = block
    origin = -size * L / 2.0 + resolution / 2.0
    return HeightField(steps * ts.step_height, resolution, (origin, origin))


def generate_stair_terrain(params: TerrainParams, seed: int,
                           resolution: float = 0.05) -> tuple[TileGrid, HeightField]:
    rng = np.random.default_rng([seed, 0])
    tileset = build_tileset(params, rng)
    grid = wfc_generate(tileset, params.grid_half_size, seed, params.max_restarts)
    return grid, rasterize(grid, resolution)


@dataclass(frozen=True)
class ObstacleParams:
    extent: tuple[float, float] = (10.0, 10.0)
    height_range: tuple[float, float] = (0.02, 0.09)
    density: float = 0.5
    box_size_range: tuple[float, float] = (0.2, 0.6)
    min_separation: float = 0.15
    spawn_clearance: float = 0.6
    resolution: float = 0.05

    def __post_init__(self):
        lo, hi = self.height_range
        if not 0.0 <= lo <= hi:
            raise ValueError(f"invalid height_range {self.height_range}")
        if self.density < 0.0:
            raise ValueError("density must be non-negative")
        if not 0.0 < self.box_size_range[0] <= self.box_size_range[1]:
            raise ValueError(f"invalid box_size_range {self.box_size_range}")


def generate_obstacle_field(params: ObstacleParams, rng: np.random.Generator,
                            max_attempts: int = 50) -> HeightField:
    """Flat ground scattered with axis-aligned boxes.

    ``density`` is boxes per square metre. Boxes are placed by rejection
    sampling: they never overlap, keep ``min_separation`` between each
    other and stay clear of the spawn disc around the origin.
    """
    ex, ey = params.extent
    res = params.resolution
    cols, rows = int(round(ex / res)), int(round(ey / res))
    origin = (-cols * res / 2.0 + res / 2.0, -rows * res / 2.0 + res / 2.0)
    xs = origin[0] + np.arange(cols) * res
    ys = origin[1] + np.arange(rows) * res
    heights = np.zeros((rows, cols))
    n_boxes = int(round(params.density * ex * ey))
    placed: list[tuple[float, float, float, float]] = []
    gap = params.min_separation
    for _ in range(n_boxes):
        for _ in range(max_attempts):
            sx, sy = rng.uniform(*params.box_size_range, size=2)
            cx = rng.uniform(-ex / 2.0, ex / 2.0)
            cy = rng.uniform(-ey / 2.0, ey / 2.0)
            x0, x1, y0, y1 = cx - sx / 2, cx + sx / 2, cy - sy / 2, cy + sy / 2
            dx = max(x0, 0.0, -x1)
            dy = max(y0, 0.0, -y1)
            if math.hypot(dx, dy) <= params.spawn_clearance:
                continue
            if any(x0 < bx1 + gap and bx0 < x1 + gap and y0 < by1 + gap and by0 < y1 + gap
                   for bx0, bx1, by0, by1 in placed):
                continue
            placed.append((x0, x1, y0, y1))
            z = rng.uniform(*params.height_range)
            in_x = (xs >= x0) & (xs < x1)
            in_y = (ys >= y0) & (ys < y1)
            heights[np.ix_(in_y, in_x)] = z
            break
    return HeightField(heights, res, origin)
