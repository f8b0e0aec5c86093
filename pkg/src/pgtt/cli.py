"""Command-line front end.

Subcommands: terrain, rollout, eval, median-fill, trajectory-dump,
print-config. Every subcommand prints a one-line JSON summary on success.
Exit codes: 0 ok, 1 usage or config error, 2 data error, 3 terrain
generation failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from pgtt.config import ConfigError, ToolkitConfig, dump_config, load_config
from pgtt.curriculum import EvalBatch, eval_metrics, level_gate, level_params, success_rate
from pgtt.elevation import Pose2D, hole_components, median_fill
from pgtt.grids import ElevationGrid, GridFormatError, HeightField
from pgtt.harness import DriverConfig, scripted_rollout
from pgtt.phase import sample_gait
from pgtt.rewards import RewardInput, RewardWeights, Suite, suite_terms, total_reward
from pgtt.swing import FootTrajectoryParams, sample_trajectory
from pgtt.terrain import (GenerationError, ObstacleParams, generate_obstacle_field,
                          generate_stair_terrain)
from pgtt.trace import TraceSchemaError, read_trace, write_trace

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_GENERATION = 0, 1, 2, 3


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True))


def cmd_terrain(cfg: ToolkitConfig, seed: int, out: str, level: int | None = None,
                kind: str | None = None) -> dict:
    tcfg = cfg.terrain
    kind = kind or tcfg.kind
    prefix = Path(out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    files = []
    summary = {"seed": seed, "kind": kind}
    if kind == "stairs":
        params = tcfg.params
        if level is not None:
            params = replace(params, step_height_range=level_params(level).step_height_range)
            summary["level"] = level
        grid, field = generate_stair_terrain(params, seed, tcfg.resolution)
        tiles_path = prefix.with_name(prefix.name + ".tiles.txt")
        tiles_path.write_text(grid.to_text())
        files.append(str(tiles_path))
        summary.update(tile_counts=grid.tile_counts(), attempts=grid.attempts,
                       step_height=grid.tileset.step_height,
                       step_width=grid.tileset.step_width, step_count=grid.tileset.step_count)
    else:
        params = replace(tcfg.obstacles, resolution=tcfg.resolution)
        field = generate_obstacle_field(params, np.random.default_rng(seed))
    hf_path = prefix.with_name(prefix.name + ".hf")
    csv_path = prefix.with_name(prefix.name + ".csv")
    field.save(hf_path)
    field.save_csv(csv_path)
    files = [str(hf_path), str(csv_path)] + files
    # report what the float32 file holds
    stored = field.heights.astype(np.float32)
    summary.update(rows=field.shape[0], cols=field.shape[1], resolution=field.resolution,
                   min_height=float(stored.min()), max_height=float(stored.max()),
                   files=files)
    return summary


def episode_seeds(seed: int, episodes: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(episodes)]


def cmd_rollout(cfg: ToolkitConfig, terrain_path: str, episodes: int, out_dir: str,
                seed: int) -> dict:
    data = Path(terrain_path).read_bytes()
    field = HeightField.from_bytes(data)
    terrain_id = hashlib.sha256(data).hexdigest()[:16]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    weights = cfg.rewards.effective()
    harness = replace(cfg.harness, leg_window=cfg.elevation.leg_window)
    files, terminated, truncated = [], 0, 0
    for e, ep_seed in enumerate(episode_seeds(seed, episodes)):
        gait = sample_gait(np.random.default_rng([ep_seed, 2]), cfg.gait)
        trace = scripted_rollout(
            field, ep_seed, model=cfg.robot, gait=gait, traj=cfg.trajectory, weights=weights,
            spec=cfg.heightmap, sampler=cfg.commands, schedule=cfg.perturbation,
            dr=cfg.randomization, config=harness, terrain_id=terrain_id,
        )
        trace.header["episode"] = e
        path = out / f"episode_{e:04d}.jsonl"
        write_trace(trace, path)
        files.append(str(path))
        terminated += trace.terminated
        truncated += trace.truncated
    return {"episodes": episodes, "terminated": terminated, "truncated": truncated,
            "terrain_id": terrain_id, "files": files}


def _weights_from_header(header: dict) -> RewardWeights:
    w = dict(header["weights"])
    w["default_pose_joint_weights"] = tuple(w["default_pose_joint_weights"])
    return RewardWeights(**w)


def cmd_eval(cfg: ToolkitConfig, trace_dir: str, out_csv: str, suite: str | None = None) -> dict:
    paths = sorted(Path(trace_dir).glob("*.jsonl"))
    if not paths:
        raise DataError(f"no trace files (*.jsonl) in {trace_dir}")
    traces = [read_trace(p) for p in paths]
    rows, lin_err, ang_err = [], [], []
    n_terminated, totals, match = 0, [], True
    eval_suite = Suite.parse(suite) if suite else None
    terms_seen: list[str] = []
    for e, tr in enumerate(traces):
        h = tr.header
        ep_suite = eval_suite or Suite.parse(h["suite"])
        weights = _weights_from_header(h)
        traj = FootTrajectoryParams(**h["trajectory"])
        for name in suite_terms(ep_suite):
            if name not in terms_seen:
                terms_seen.append(name)
        le, ae = [], []
        for step in tr.steps:
            inp = RewardInput.from_dict(step["reward_input"])
            b = total_reward(ep_suite, inp, weights, traj)
            total = b.total
            if ep_suite.value == h["suite"]:
                match &= total == step["reward"]["total"]
            totals.append(total)
            row = {"episode": e, "k": step["k"], "t": step["t"], "suite": ep_suite.value}
            for name, (raw, wv) in b.terms.items():
                row[f"{name}_raw"] = raw
                row[f"{name}_weighted"] = wv
            row["total"] = total
            rows.append(row)
            le.append(inp.command[:2] - inp.base_lin_vel[:2])
            ae.append(inp.command[2] - inp.base_ang_vel[2])
        lin_err.append(np.array(le).reshape(-1, 2))
        ang_err.append(np.array(ae))
        n_terminated += tr.terminated
    horizon = max(int(tr.header["length"]) for tr in traces)
    batch = EvalBatch(lin_err, ang_err, horizon, n_terminated)
    m_v, m_w = eval_metrics(batch, cfg.curriculum)
    columns = ["episode", "k", "t", "suite"]
    for name in terms_seen:
        columns += [f"{name}_raw", f"{name}_weighted"]
    columns.append("total")
    Path(out_csv).parent.mkdir(parents=True, exist_ok=True)
    with open(out_csv, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns, restval="", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    same_suite = eval_suite is None or all(tr.header["suite"] == eval_suite.value for tr in traces)
    return {
        "episodes": len(traces), "steps": len(rows), "m_v": m_v, "m_w": m_w,
        "terminated": n_terminated, "success_rate": success_rate(n_terminated, len(traces)),
        "gate_passed": level_gate(m_v, m_w, cfg.curriculum),
        "mean_total": float(np.mean(totals)) if totals else 0.0,
        "recorded_totals_match": bool(match) if same_suite else None,
        "csv": str(out_csv),
    }


def cmd_median_fill(cfg: ToolkitConfig, in_path: str, out_path: str, r_hole: int | None) -> dict:
    grid = ElevationGrid.load(in_path)
    r = cfg.elevation.r_hole if r_hole is None else r_hole
    filled = median_fill(grid, r)
    filled.save(out_path)
    _, holes_left, _, _ = hole_components(filled.valid)
    return {"r_hole": r, "filled_cells": int(filled.valid.sum() - grid.valid.sum()),
            "invalid_cells": int((~filled.valid).sum()), "holes_remaining": int(holes_left),
            "out": str(out_path)}


def cmd_trajectory_dump(cfg: ToolkitConfig, out_path: str, delta_h: float, samples: int) -> dict:
    traj = sample_trajectory(cfg.trajectory, delta_h, samples)
    lines = ["phase,height"] + [f"{float(p)!r},{float(z)!r}" for p, z in traj]
    text = "\n".join(lines) + "\n"
    if out_path == "-":
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text)
    return {"samples": samples, "delta_h": delta_h, "min_height": float(traj[:, 1].min()),
            "max_height": float(traj[:, 1].max()), "out": out_path}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pgtt", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="YAML toolkit config (defaults when omitted)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("terrain", help="generate a terrain height field")
    t.add_argument("--out", required=True, help="output prefix; writes .hf, .csv, .tiles.txt")
    t.add_argument("--seed", type=int, help="terrain seed (default: seeds.terrain)")
    t.add_argument("--level", type=int, choices=(1, 2, 3, 4), help="curriculum level step heights")
    t.add_argument("--kind", choices=("stairs", "obstacles"), help="default: terrain.kind")

    r = sub.add_parser("rollout", help="scripted rollouts over a terrain file")
    r.add_argument("--terrain", required=True, help="binary height field (.hf)")
    r.add_argument("--out", required=True, help="directory for episode_XXXX.jsonl traces")
    r.add_argument("--episodes", type=int, default=1)
    r.add_argument("--seed", type=int, help="rollout seed (default: seeds.rollout)")
    r.add_argument("--suite", choices=[s.value for s in Suite], help="default: harness.suite")
    r.add_argument("--length", type=int, help="steps per episode (default: harness.length)")
    r.add_argument("--driver", choices=("exact", "bias", "noise", "drag"),
                   help="foot driver (default: harness.driver.kind)")
    r.add_argument("--evaluation", action="store_true", help="scale commands by the eval factor")
    r.add_argument("--perturb", action="store_true", help="apply push perturbations")
    r.add_argument("--randomize", action="store_true", help="sample domain randomization")

    e = sub.add_parser("eval", help="reward CSV and metrics from trace files")
    e.add_argument("--traces", required=True, help="directory of trace files")
    e.add_argument("--out", required=True, help="per-step reward CSV")
    e.add_argument("--suite", choices=[s.value for s in Suite],
                   help="re-score every trace with this suite (default: each trace's own)")

    m = sub.add_parser("median-fill", help="in-paint small holes of an elevation grid file")
    m.add_argument("--input", required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--r-hole", type=int, help="default: elevation.r_hole")

    d = sub.add_parser("trajectory-dump", help="desired foot height over one gait cycle as CSV")
    d.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    d.add_argument("--delta-h", type=float, default=0.0)
    d.add_argument("--samples", type=int, default=360, help="evenly spaced phases over one cycle")

    sub.add_parser("print-config", help="print the effective config as YAML")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "print-config":
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        if args.command == "terrain":
            seed = cfg.seeds.terrain if args.seed is None else args.seed
            summary = cmd_terrain(cfg, seed, args.out, args.level, args.kind)
        elif args.command == "rollout":
            if args.episodes < 0:
                raise ConfigError("--episodes", "must be >= 0")
            h = cfg.harness
            h = replace(h, suite=args.suite or h.suite, length=args.length or h.length,
                        driver=replace(h.driver, kind=args.driver or h.driver.kind),
                        evaluation=h.evaluation or args.evaluation,
                        perturb=h.perturb or args.perturb,
                        randomize=h.randomize or args.randomize)
            cfg = replace(cfg, harness=h)
            seed = cfg.seeds.rollout if args.seed is None else args.seed
            summary = cmd_rollout(cfg, args.terrain, args.episodes, args.out, seed)
        elif args.command == "eval":
            summary = cmd_eval(cfg, args.traces, args.out, args.suite)
        elif args.command == "median-fill":
            summary = cmd_median_fill(cfg, args.input, args.out, args.r_hole)
        else:
            summary = cmd_trajectory_dump(cfg, args.out, args.delta_h, args.samples)
            if args.out == "-":
                return EXIT_OK
    except ConfigError as e:
        print(f"pgtt: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except GenerationError as e:
        print(f"pgtt: generation failed: {e}", file=sys.stderr)
        return EXIT_GENERATION
    except (GridFormatError, TraceSchemaError, DataError, FileNotFoundError) as e:
        print(f"pgtt: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"pgtt: invalid input: {e}", file=sys.stderr)
        return EXIT_DATA
    _emit(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
