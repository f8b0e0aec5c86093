"""Generate stair terrains for many seeds per curriculum level and audit them.

Checks every grid for adjacency violations, a flat spawn tile and identical
regeneration, then prints one JSON line per level.

    python3 scripts/wfc_audit.py --seeds 1000
"""

import argparse
import json
import time

from pgtt.curriculum import LEVEL_HEIGHTS, level_params
from pgtt.terrain import TileKind, generate_stair_terrain


def audit_level(level: int, seeds: int) -> dict:
    params = level_params(level).terrain_params()
    bad_adjacency, bad_centre, not_reproducible, restarts = [], [], [], 0
    start = time.perf_counter()
    for seed in range(seeds):
        grid, field = generate_stair_terrain(params, seed)
        if grid.adjacency_violations():
            bad_adjacency.append(seed)
        n = grid.size
        centre = grid.tile(n // 2, n // 2)
        if centre.kind is not TileKind.FLAT or centre.base_steps != 0:
            bad_centre.append(seed)
        again, field2 = generate_stair_terrain(params, seed)
        if again.to_text() != grid.to_text() or field2.to_bytes() != field.to_bytes():
            not_reproducible.append(seed)
        restarts += grid.attempts - 1
    return {"level": level, "seeds": seeds, "adjacency_failures": bad_adjacency,
            "centre_failures": bad_centre, "regeneration_failures": not_reproducible,
            "restarts": restarts, "seconds": round(time.perf_counter() - start, 3)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=1000)
    ap.add_argument("--levels", type=int, nargs="+", default=sorted(LEVEL_HEIGHTS))
    args = ap.parse_args()
    ok = True
    for level in args.levels:
        report = audit_level(level, args.seeds)
        ok &= not (report["adjacency_failures"] or report["centre_failures"]
                   or report["regeneration_failures"])
        print(json.dumps(report))
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":
    main()
