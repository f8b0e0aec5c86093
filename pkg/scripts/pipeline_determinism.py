"""Run terrain -> rollout -> eval twice and compare every artifact byte for byte.

    python3 scripts/pipeline_determinism.py --seed 12 --episodes 4
"""

import argparse
import hashlib
import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run_pipeline(workdir: Path, args) -> list[str]:
    stages = [
        ["terrain", "--out", "terrain/t", "--seed", str(args.seed), "--level", str(args.level)],
        ["rollout", "--terrain", "terrain/t.hf", "--out", "traces", "--episodes",
         str(args.episodes), "--length", str(args.length), "--seed", str(args.seed),
         "--perturb", "--randomize"],
        ["eval", "--traces", "traces", "--out", "report/rewards.csv"],
    ]
    outputs = []
    for stage in stages:
        proc = subprocess.run([sys.executable, "-m", "pgtt", *stage], cwd=workdir,
                              capture_output=True, text=True, check=True)
        outputs.append(proc.stdout)
    return outputs


def digests(root: Path) -> dict[str, str]:
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=12)
    ap.add_argument("--level", type=int, default=3, choices=(1, 2, 3, 4))
    ap.add_argument("--episodes", type=int, default=4)
    ap.add_argument("--length", type=int, default=400)
    args = ap.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        runs = []
        for name in ("a", "b"):
            d = Path(tmp) / name
            d.mkdir()
            runs.append((run_pipeline(d, args), digests(d)))
    (out_a, dig_a), (out_b, dig_b) = runs
    differing = sorted(k for k in dig_a.keys() | dig_b.keys() if dig_a.get(k) != dig_b.get(k))
    same = out_a == out_b and not differing
    print(json.dumps({"identical": same, "files": len(dig_a), "differing": differing,
                      "eval": json.loads(out_a[2])}))
    raise SystemExit(0 if same else 1)


if __name__ == "__main__":
    main()
