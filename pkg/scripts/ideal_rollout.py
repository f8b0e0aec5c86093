"""Scripted rollouts with the exact foot driver on flat ground.

Under perfect tracking the phase reward is 4 per step and no swing foot
touches the ground; the script reports how far each episode strays from that.

    python3 scripts/ideal_rollout.py --episodes 5 --length 1000
"""

import argparse
import json

import numpy as np

from pgtt.grids import HeightField
from pgtt.harness import HarnessConfig, scripted_rollout


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=5)
    ap.add_argument("--length", type=int, default=1000)
    ap.add_argument("--suite", default="pgtt", choices=("pgtt", "massloco", "wild"))
    ap.add_argument("--field-size", type=float, default=50.0, help="side of the square field, m")
    args = ap.parse_args()

    res = 0.1
    n = int(round(args.field_size / res))
    origin = -n * res / 2 + res / 2
    field = HeightField(np.zeros((n, n)), res, (origin, origin))
    ok = True
    for seed in range(args.episodes):
        tr = scripted_rollout(field, seed, config=HarnessConfig(length=args.length, suite=args.suite))
        phase_err = contacts = None
        if args.suite == "pgtt":
            phase_err = float(np.max(np.abs(tr.rewards("foot_phase") - 4.0)))
            contacts = float(tr.rewards("foot_contact").sum())
            ok &= phase_err <= 1e-9 and contacts == 0.0
        ok &= not (tr.terminated or tr.truncated)
        print(json.dumps({"seed": seed, "steps": len(tr.steps), "terminated": tr.terminated,
                          "truncated": tr.truncated, "max_phase_error": phase_err,
                          "swing_contacts": contacts,
                          "mean_total": float(tr.rewards().mean())}))
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":
    main()
