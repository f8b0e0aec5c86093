"""Independent reference implementations used as test oracles.

Everything here is written from the formulas directly in plain Python
(scalar loops, no vectorisation, no calls into the package's numerics) so
that agreement with the package is evidence rather than tautology.
"""

from __future__ import annotations

import math
import statistics
from collections import deque

TWO_PI = 2.0 * math.pi


# swing trajectory via the Hermite basis polynomials (not the power-basis coefficients)

def hermite_basis_value(p0, p1, m0, m1, T, t):
    s = t / T
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * p0 + h10 * T * m0 + h01 * p1 + h11 * T * m1


def foot_height(phi, d_b, d_s, stance_ratio, delta_h):
    if phi >= TWO_PI:
        phi -= TWO_PI
    t_st = TWO_PI * stance_ratio
    t_pk = TWO_PI * (1 + stance_ratio) / 2
    T = t_pk - t_st
    if phi < t_st:
        return d_b
    if phi < t_pk:
        return hermite_basis_value(d_b, d_s + delta_h, 0.0, 0.0, T, phi - t_st)
    return hermite_basis_value(d_s + delta_h, d_b, 0.0, 0.0, T, phi - t_pk)


# reward table, one function per row

def _l(v):
    return [float(x) for x in v]


def r_lin_vel_tracking(inp, sigma_v):
    e = sum((float(inp.command[i]) - float(inp.base_lin_vel[i])) ** 2 for i in range(2))
    return math.exp(-e / sigma_v)


def r_ang_vel_tracking(inp, sigma_v):
    return math.exp(-((float(inp.command[2]) - float(inp.base_ang_vel[2])) ** 2) / sigma_v)


def r_lin_vel_z(inp):
    return float(inp.base_lin_vel[2]) ** 2


def r_ang_vel_xy(inp):
    return float(inp.base_ang_vel[0]) ** 2 + float(inp.base_ang_vel[1]) ** 2


def r_orientation(inp):
    return float(inp.projected_gravity[0]) ** 2 + float(inp.projected_gravity[1]) ** 2


def r_termination(inp):
    return 0.0 if inp.alive else 1.0


def r_joint_power(inp):
    return math.fsum(abs(t) * abs(v) for t, v in zip(_l(inp.joint_torque), _l(inp.joint_vel)))


def r_action_rate(inp):
    return math.fsum((a - b) ** 2 for a, b in zip(_l(inp.action), _l(inp.last_action)))


def r_joint_limits(inp):
    n = 0
    for q, lo, hi in zip(_l(inp.joint_pos), _l(inp.q_min), _l(inp.q_max)):
        if q > hi or q < lo:
            n += 1
    return float(n)


def r_default_pose(inp, joint_weights):
    return math.fsum(abs(q - d) * w for q, d, w in zip(_l(inp.joint_pos), _l(inp.q_def), joint_weights))


def r_joint_torques(inp):
    return math.fsum(t * t for t in _l(inp.joint_torque))


def r_foot_phase(inp, traj, sigma_f):
    total = 0.0
    for i in range(4):
        des = foot_height(float(inp.phases[i]), traj.d_b, traj.d_s, traj.stance_ratio,
                          float(inp.leg_delta_h[i]))
        total += math.exp(-((des - float(inp.foot_height_hip[i])) ** 2) / sigma_f)
    return total


def _swing(phi):
    return math.pi <= phi < TWO_PI


def r_foot_contact(inp):
    return float(sum(1 for i in range(4) if _swing(float(inp.phases[i])) and bool(inp.contacts[i])))


def _speed(inp, i):
    return math.hypot(float(inp.foot_vel_xy[i][0]), float(inp.foot_vel_xy[i][1]))


def r_massloco_foot_clearance(inp, swing_height):
    total = 0.0
    for i in range(4):
        target = float(inp.foot_ground_z[i]) + swing_height
        total += (target - float(inp.foot_height_world[i])) ** 2 * _speed(inp, i)
    return total


def r_foot_slip(inp):
    return math.fsum(_speed(inp, i) for i in range(4) if bool(inp.contacts[i]))


def _cmd_norm(inp):
    return math.sqrt(sum(float(c) ** 2 for c in inp.command))


def r_feet_air_time(inp):
    if not _cmd_norm(inp) > 0.01:
        return 0.0
    return math.fsum(float(inp.air_time[i]) - 0.5 for i in range(4) if bool(inp.first_contact[i]))


def r_stand_still(inp):
    if not _cmd_norm(inp) < 0.01:
        return 0.0
    return math.fsum(abs(q - d) for q, d in zip(_l(inp.joint_pos), _l(inp.q_def)))


def r_wild_foot_clearance(inp):
    return float(sum(1 for i in range(4)
                     if _swing(float(inp.phases[i]))
                     and float(inp.foot_height_world[i]) >= float(inp.leg_h_max[i])))


def reference_terms(suite: str, inp, w, traj) -> dict[str, tuple[float, float]]:
    """name -> (raw, weighted) for one suite, straight from the table rows."""
    rows = {
        "lin_vel_tracking": (r_lin_vel_tracking(inp, w.sigma_v), w.lin_vel_tracking),
        "ang_vel_tracking": (r_ang_vel_tracking(inp, w.sigma_v), w.ang_vel_tracking),
        "lin_vel_z": (r_lin_vel_z(inp), w.lin_vel_z),
        "ang_vel_xy": (r_ang_vel_xy(inp), w.ang_vel_xy),
        "orientation": (r_orientation(inp), w.orientation),
        "termination": (r_termination(inp), w.termination),
        "joint_power": (r_joint_power(inp), w.joint_power),
        "action_rate": (r_action_rate(inp), w.action_rate),
        "joint_limits": (r_joint_limits(inp), w.joint_limits),
        "default_pose": (r_default_pose(inp, w.default_pose_joint_weights), w.default_pose),
        "joint_torques": (r_joint_torques(inp), w.joint_torques),
    }
    if suite == "pgtt":
        rows["foot_phase"] = (r_foot_phase(inp, traj, w.sigma_f), w.foot_phase)
        rows["foot_contact"] = (r_foot_contact(inp), w.foot_contact)
    elif suite == "massloco":
        rows["foot_clearance"] = (r_massloco_foot_clearance(inp, w.massloco_swing_height),
                                  w.massloco_foot_clearance)
        rows["foot_slip"] = (r_foot_slip(inp), w.foot_slip)
        rows["feet_air_time"] = (r_feet_air_time(inp), w.feet_air_time)
        rows["stand_still"] = (r_stand_still(inp), w.stand_still)
    elif suite == "wild":
        rows["foot_clearance"] = (r_wild_foot_clearance(inp), w.wild_foot_clearance)
        rows["foot_slip"] = (r_foot_slip(inp), w.foot_slip)
    else:
        raise ValueError(suite)
    return {k: (raw, raw * wt) for k, (raw, wt) in rows.items()}


# stair tiles: scalar height function per tile, by counting risers

def risers_passed(s, n, w, L):
    """Number of risers at positions s0 + k*w (k < n) lying at or before s."""
    s0 = (L - (n - 1) * w) / 2
    count = 0
    for k in range(n):
        if s >= s0 + k * w:
            count += 1
    return count


def ascent_coordinate(kind: str, orientation: int, u: float, v: float, L: float) -> float:
    """Distance along the ascent for a point at local (u east, v north)."""
    east, north, west, south = u, v, L - u, L - v
    if kind == "stair_straight":
        # the run climbs toward the side named by the orientation
        return {0: east, 1: north, 2: west, 3: south}[orientation]
    # corner runs climb toward a corner: NE, NW, SW, SE
    corner = {0: (east, north), 1: (north, west), 2: (west, south), 3: (south, east)}
    return max(corner[orientation])


def tile_height(tile, u: float, v: float, L: float) -> float:
    h = tile.step_height
    if tile.kind.value == "flat":
        return tile.base_steps * h
    s = ascent_coordinate(tile.kind.value, tile.orientation, u, v, L)
    return (tile.base_steps + risers_passed(s, tile.step_count, tile.step_width, L)) * h


def terrain_height(grid, x: float, y: float) -> float:
    """Analytic height of a tile grid at world (x, y); the centre tile is centred on the origin."""
    L = grid.tileset.tile_size
    half = grid.size * L / 2
    col = int(math.floor((x + half) / L))
    row = int(math.floor((y + half) / L))
    u = x + half - col * L
    v = y + half - row * L
    return tile_height(grid.tileset.tiles[grid.cells[row][col]], u, v, L)


def nearest_cell_center(x: float, y: float, origin, res: float) -> tuple[float, float]:
    cx = origin[0] + round((x - origin[0]) / res) * res
    cy = origin[1] + round((y - origin[1]) / res) * res
    return cx, cy


def adjacency_audit(grid, samples: int = 64, eps: float = 1e-9) -> list[tuple]:
    """Compare both tiles' analytic heights just either side of every shared edge."""
    L = grid.tileset.tile_size
    bad = []
    tiles = grid.tileset.tiles
    n = grid.size
    ts = [(k + 0.5) / samples * L for k in range(samples)]
    for r in range(n):
        for c in range(n):
            a = tiles[grid.cells[r][c]]
            if c + 1 < n:
                b = tiles[grid.cells[r][c + 1]]
                if any(tile_height(a, L - eps, t, L) != tile_height(b, eps, t, L) for t in ts):
                    bad.append((r, c, "E"))
            if r + 1 < n:
                b = tiles[grid.cells[r + 1][c]]
                if any(tile_height(a, t, L - eps, L) != tile_height(b, t, eps, L) for t in ts):
                    bad.append((r, c, "N"))
    return bad


# hole filling by breadth-first search

def bfs_holes(valid):
    """List of (cells, radius, touches_border) for 8-connected invalid groups."""
    rows, cols = len(valid), len(valid[0])
    seen = [[False] * cols for _ in range(rows)]
    valid_cells = [(r, c) for r in range(rows) for c in range(cols) if valid[r][c]]
    holes = []
    for r in range(rows):
        for c in range(cols):
            if valid[r][c] or seen[r][c]:
                continue
            comp, queue = [], deque([(r, c)])
            seen[r][c] = True
            while queue:
                i, j = queue.popleft()
                comp.append((i, j))
                for di in (-1, 0, 1):
                    for dj in (-1, 0, 1):
                        a, b = i + di, j + dj
                        if 0 <= a < rows and 0 <= b < cols and not valid[a][b] and not seen[a][b]:
                            seen[a][b] = True
                            queue.append((a, b))
            border = any(i in (0, rows - 1) or j in (0, cols - 1) for i, j in comp)
            if valid_cells:
                radius = max(min(max(abs(i - a), abs(j - b)) for a, b in valid_cells)
                             for i, j in comp)
            else:
                radius = max(rows, cols)
            holes.append((comp, radius, border))
    return holes


def reference_median_fill(mean, valid, r_hole):
    """(filled means, filled validity) as nested lists."""
    rows, cols = len(valid), len(valid[0])
    out_mean = [list(map(float, row)) for row in mean]
    out_valid = [list(map(bool, row)) for row in valid]
    for comp, radius, border in bfs_holes(valid):
        if border or radius > r_hole:
            continue
        for i, j in comp:
            vals = [float(mean[a][b])
                    for a in range(max(0, i - r_hole), min(rows, i + r_hole + 1))
                    for b in range(max(0, j - r_hole), min(cols, j + r_hole + 1))
                    if valid[a][b]]
            out_mean[i][j] = statistics.median(vals)
            out_valid[i][j] = True
    return out_mean, out_valid
