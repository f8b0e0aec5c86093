"""Curriculum levels, level-completion gate and evaluation metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pgtt.terrain import TerrainParams

LEVEL_HEIGHTS = {
    1: (0.01, 0.03),
    2: (0.01, 0.07),
    3: (0.01, 0.10),
    4: (0.01, 0.13),
}


@dataclass(frozen=True)
class LevelSpec:
    level: int
    step_height_range: tuple[float, float]
    step_width_range: tuple[float, float] = (0.30, 0.45)
    step_count_range: tuple[int, int] = (2, 4)
    grid_half_size: int = 2

    def terrain_params(self, **overrides) -> TerrainParams:
        return TerrainParams(step_width_range=self.step_width_range,
                             step_height_range=self.step_height_range,
                             step_count_range=self.step_count_range,
                             grid_half_size=self.grid_half_size, **overrides)


def level_params(level: int) -> LevelSpec:
    if level not in LEVEL_HEIGHTS:
        raise ValueError(f"unknown curriculum level {level!r}; levels are 1-4")
    return LevelSpec(level, LEVEL_HEIGHTS[level])


@dataclass(frozen=True)
class GateConfig:
    threshold: float = 0.65
    sigma: float = 0.25
    epsilon: float = 0.02
    n_eval: int = 1000
    passes_required: int = 1

    def __post_init__(self):
        if not 0.0 <= self.threshold < 1.0:
            raise ValueError("threshold must lie in [0, 1)")
        if not (self.sigma > 0.0 and self.epsilon > 0.0):
            raise ValueError("sigma and epsilon must be positive")
        if self.passes_required < 1:
            raise ValueError("passes_required must be >= 1")


@dataclass(frozen=True, eq=False)
class EvalBatch:
    """Per-agent velocity-error sequences from one evaluation round.

    ``lin_err[e]`` is a (T_e, 2) or (T_e,) array of linear velocity errors
    for agent ``e``; ``ang_err[e]`` has shape (T_e,). Agents terminated
    early have shorter sequences and score nothing for the missing steps.
    """

    lin_err: Sequence[np.ndarray]
    ang_err: Sequence[np.ndarray]
    horizon: int
    n_terminated: int = 0

    def __post_init__(self):
        if len(self.lin_err) != len(self.ang_err):
            raise ValueError("lin_err and ang_err must cover the same agents")
        if not 0 <= self.n_terminated <= len(self.lin_err):
            raise ValueError("n_terminated must lie in [0, number of rollouts]")

    @property
    def n_rollouts(self) -> int:
        return len(self.lin_err)

    @classmethod
    def from_arrays(cls, lin_err, ang_err, n_terminated: int = 0) -> "EvalBatch":
        lin_err = np.asarray(lin_err, dtype=float)
        ang_err = np.asarray(ang_err, dtype=float)
        return cls(list(lin_err), list(ang_err), ang_err.shape[1], n_terminated)


def _sq(e: np.ndarray) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    return np.sum(e * e, axis=-1) if e.ndim == 2 else e * e


def eval_metrics(batch: EvalBatch, cfg: GateConfig = GateConfig()) -> tuple[float, float]:
    """(m_v, m_omega): mean Gaussian tracking score over agents and the horizon."""
    if batch.n_rollouts == 0 or batch.horizon < 1:
        raise ValueError("evaluation batch is empty")
    denom = batch.n_rollouts * batch.horizon
    sv = math.fsum(math.fsum(np.exp(-_sq(e)[:batch.horizon] / cfg.sigma)) for e in batch.lin_err)
    sw = math.fsum(math.fsum(np.exp(-_sq(e)[:batch.horizon] / cfg.sigma)) for e in batch.ang_err)
    return sv / denom, sw / denom


def level_gate(m_v: float, m_w: float, cfg: GateConfig = GateConfig()) -> bool:
    return m_v >= cfg.threshold and m_w >= cfg.threshold


def convergence_check(r_t: float, r_prev: float, epsilon: float = 0.02) -> bool:
    if r_prev == 0.0:
        raise ValueError("relative change is undefined for a zero previous reward")
    return abs(r_t - r_prev) / abs(r_prev) < epsilon


def success_rate(n_terminated: int, n_total: int) -> float:
    if n_total <= 0:
        raise ValueError("need at least one rollout")
    if not 0 <= n_terminated <= n_total:
        raise ValueError("n_terminated must lie in [0, n_total]")
    return 1.0 - n_terminated / n_total


@dataclass
class CurriculumState:
    """Level tracker driven by an external trainer's evaluation rounds."""

    cfg: GateConfig = field(default_factory=GateConfig)
    level: int = 1
    passes: int = 0
    history: list[dict] = field(default_factory=list)

    @property
    def finished(self) -> bool:
        return self.level > max(LEVEL_HEIGHTS)

    def update(self, m_v: float, m_w: float) -> dict:
        passed = level_gate(m_v, m_w, self.cfg)
        self.passes = self.passes + 1 if passed else 0
        advanced = False
        if passed and self.passes >= self.cfg.passes_required and not self.finished:
            self.level += 1
            self.passes = 0
            advanced = True
        record = {"level": self.level, "m_v": m_v, "m_w": m_w, "passed": passed,
                  "advanced": advanced}
        self.history.append(record)
        return record
