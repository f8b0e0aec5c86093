"""Line-delimited JSON rollout traces.

A trace file holds one JSON object per line: an episode header
(``"type": "header"``), one ``"type": "step"`` record per control step in
time order, and a closing ``"type": "footer"``. Step records carry ``k``,
``t``, ``base_pose`` [x, y, z, yaw], ``heightmap`` (world z, row-major),
``heightmap_clamped``, ``reward_input`` (every reward input field),
``reward`` ({"terms": {name: [raw, weighted]}, "total"}) and
``terminated``; optional ``observation`` and ``privileged_state``. Floats
are written with round-trip precision, so re-reading a trace reproduces
the recorded values bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

from pgtt.harness import RolloutTrace
from pgtt.rewards import RewardInput

HEADER_FIELDS = ("seed", "suite", "length", "dt", "gait", "trajectory", "weights")
STEP_FIELDS = ("k", "t", "base_pose", "reward_input", "reward", "terminated")


class TraceSchemaError(ValueError):
    def __init__(self, message: str, path=None, line: int | None = None, field: str | None = None):
        where = f"{path}:{line}: " if path is not None and line is not None else ""
        super().__init__(where + message)
        self.field = field


def dumps_trace(trace: RolloutTrace) -> str:
    lines = [json.dumps(trace.header, separators=(",", ":"))]
    lines += [json.dumps(s, separators=(",", ":")) for s in trace.steps]
    lines.append(json.dumps(trace.footer, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def write_trace(trace: RolloutTrace, path) -> None:
    Path(path).write_text(dumps_trace(trace))


def read_trace(path) -> RolloutTrace:
    path = Path(path)
    text = path.read_text()
    records = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append((i, json.loads(line)))
        except json.JSONDecodeError as e:
            raise TraceSchemaError(f"invalid JSON: {e.msg}", path, i) from None
    if not records or records[0][1].get("type") != "header":
        raise TraceSchemaError("missing episode header", path, 1, "header")
    header = records[0][1]
    for f in HEADER_FIELDS:
        if f not in header:
            raise TraceSchemaError(f"header is missing field {f!r}", path, records[0][0], f)
    footer = None
    steps = []
    for i, rec in records[1:]:
        kind = rec.get("type")
        if kind == "footer":
            footer = rec
            continue
        if kind != "step":
            raise TraceSchemaError(f"unexpected record type {kind!r}", path, i, "type")
        for f in STEP_FIELDS:
            if f not in rec:
                raise TraceSchemaError(f"step record is missing field {f!r}", path, i, f)
        for f in RewardInput.field_names():
            if f not in rec["reward_input"]:
                raise TraceSchemaError(f"reward_input is missing field {f!r}", path, i, f)
        steps.append(rec)
    if footer is None:
        raise TraceSchemaError("missing footer", path, len(text.splitlines()), "footer")
    return RolloutTrace(header, steps, bool(footer.get("terminated", False)),
                        bool(footer.get("truncated", False)))
