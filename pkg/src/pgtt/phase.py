"""Per-leg gait clock.

Legs are ordered FL, FR, RL, RR everywhere in the package. A leg is in
stance while its phase lies in [0, pi) and in swing on [pi, 2 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi
LEG_NAMES = ("FL", "FR", "RL", "RR")
N_LEGS = 4

GAIT_TEMPLATES: dict[str, tuple[float, float, float, float]] = {
    "trot": (0.0, math.pi, math.pi, 0.0),
    "pace": (0.0, math.pi, 0.0, math.pi),
    "bound": (0.0, 0.0, math.pi, math.pi),
    "pronk": (0.0, 0.0, 0.0, 0.0),
    "walk": (0.0, math.pi, 1.5 * math.pi, 0.5 * math.pi),
}


class LegPhase(str, Enum):
    STANCE = "stance"
    SWING = "swing"


def wrap_angle(phi: float) -> float:
    """Map an angle into [0, 2 pi)."""
    w = math.fmod(phi, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    # fmod of a value just below a multiple of 2 pi can round up to 2 pi
    if w >= TWO_PI:
        w = 0.0
    return w


@dataclass(frozen=True)
class GaitConfig:
    leg_offsets: tuple[float, float, float, float] = GAIT_TEMPLATES["trot"]
    base_frequency: float = 2.0
    stance_ratio: float = 0.5

    def __post_init__(self):
        offsets = tuple(float(o) for o in self.leg_offsets)
        if len(offsets) != N_LEGS:
            raise ValueError(f"expected {N_LEGS} leg offsets, got {len(offsets)}")
        if any(not (0.0 <= o < TWO_PI) for o in offsets):
            raise ValueError(f"leg offsets must lie in [0, 2pi): {offsets}")
        if not self.base_frequency > 0.0:
            raise ValueError(f"base_frequency must be positive, got {self.base_frequency}")
        if not 0.0 < self.stance_ratio < 1.0:
            raise ValueError(f"stance_ratio must lie in (0, 1), got {self.stance_ratio}")
        object.__setattr__(self, "leg_offsets", offsets)

    @classmethod
    def from_template(cls, name: str, base_frequency: float = 2.0,
                      stance_ratio: float = 0.5) -> "GaitConfig":
        try:
            offsets = GAIT_TEMPLATES[name]
        except KeyError:
            raise ValueError(f"unknown gait template {name!r}; "
                             f"choose from {sorted(GAIT_TEMPLATES)}") from None
        return cls(offsets, base_frequency, stance_ratio)


@dataclass(frozen=True)
class PhaseState:
    phases: tuple[float, float, float, float]
    time: float = 0.0

    def __post_init__(self):
        phases = tuple(float(p) for p in self.phases)
        if len(phases) != N_LEGS:
            raise ValueError(f"expected {N_LEGS} phases, got {len(phases)}")
        if any(not (0.0 <= p < TWO_PI) for p in phases):
            raise ValueError(f"phases must lie in [0, 2pi): {phases}")
        object.__setattr__(self, "phases", phases)

    @classmethod
    def initial(cls, gait: GaitConfig) -> "PhaseState":
        return cls(gait.leg_offsets, 0.0)


def phases_at(gait: GaitConfig, t: float) -> tuple[float, float, float, float]:
    """Closed-form leg phases at absolute time ``t``."""
    advance = TWO_PI * gait.base_frequency * t
    return tuple(wrap_angle(o + advance) for o in gait.leg_offsets)


def advance_phase(state: PhaseState, gait: GaitConfig, dt: float) -> PhaseState:
    # Evaluated from the offsets and absolute time so repeated calls never drift.
    if dt < 0.0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    t = state.time + dt
    return PhaseState(phases_at(gait, t), t)


def classify_phase(phi: float) -> LegPhase:
    if not 0.0 <= phi < TWO_PI:
        raise ValueError(f"phase {phi} outside [0, 2pi)")
    return LegPhase.STANCE if phi < math.pi else LegPhase.SWING


def in_swing(phi: float) -> bool:
    return math.pi <= phi < TWO_PI


def phase_encoding(state: PhaseState) -> np.ndarray:
    """[cos phi_0..cos phi_3, sin phi_0..sin phi_3]."""
    phi = np.asarray(state.phases, dtype=float)
    return np.concatenate([np.cos(phi), np.sin(phi)])


@dataclass(frozen=True)
class GaitRanges:
    frequency: tuple[float, float] = (1.0, 3.0)
    template: str = "trot"
    stance_ratio: float = 0.5

    def __post_init__(self):
        lo, hi = self.frequency
        if not 0.0 < lo <= hi:
            raise ValueError(f"invalid frequency range {self.frequency}")
        if self.template not in GAIT_TEMPLATES:
            raise ValueError(f"unknown gait template {self.template!r}")


def sample_gait(rng: np.random.Generator, ranges: GaitRanges = GaitRanges()) -> GaitConfig:
    lo, hi = ranges.frequency
    f = lo if lo == hi else float(rng.uniform(lo, hi))
    return GaitConfig.from_template(ranges.template, f, ranges.stance_ratio)
