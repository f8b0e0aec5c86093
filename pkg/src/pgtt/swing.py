"""Terrain-adaptive foot height reference built from cubic Hermite segments.

The spline parameter is the leg phase in radians. Heights are z in the hip
frame (negative below the hip).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pgtt.phase import TWO_PI


@dataclass(frozen=True)
class HermiteSegment:
    c0: float
    c1: float
    c2: float
    c3: float
    duration: float

    @property
    def coeffs(self) -> tuple[float, float, float, float]:
        return (self.c0, self.c1, self.c2, self.c3)


def hermite_coeffs(p0: float, p1: float, m0: float, m1: float, T: float) -> HermiteSegment:
    if not T > 0.0:
        raise ValueError(f"segment duration must be positive, got {T}")
    dp = p1 - p0
    c2 = 3.0 / T**2 * dp - 2.0 / T * m0 - 1.0 / T * m1
    c3 = -2.0 / T**3 * dp + 1.0 / T**2 * (m0 + m1)
    return HermiteSegment(p0, m0, c2, c3, T)


def hermite_eval(seg: HermiteSegment, t: float) -> float:
    if not 0.0 <= t <= seg.duration:
        raise ValueError(f"t={t} outside [0, {seg.duration}]")
    return seg.c0 + t * (seg.c1 + t * (seg.c2 + t * seg.c3))


def hermite_deriv(seg: HermiteSegment, t: float) -> float:
    return seg.c1 + t * (2.0 * seg.c2 + 3.0 * t * seg.c3)


@dataclass(frozen=True)
class FootTrajectoryParams:
    d_b: float = -0.30
    d_s: float = -0.22
    stance_ratio: float = 0.5

    def __post_init__(self):
        if not self.d_s > self.d_b:
            raise ValueError(f"swing apex d_s={self.d_s} must lie above stance height d_b={self.d_b}")
        if not 0.0 < self.stance_ratio < 1.0:
            raise ValueError(f"stance_ratio must lie in (0, 1), got {self.stance_ratio}")

    @property
    def t_stance(self) -> float:
        return TWO_PI * self.stance_ratio

    @property
    def t_peak(self) -> float:
        return TWO_PI * (1.0 + self.stance_ratio) / 2.0

    @property
    def t_swing(self) -> float:
        return TWO_PI * (1.0 - self.stance_ratio) / 2.0


def swing_segments(params: FootTrajectoryParams, delta_h: float) -> tuple[HermiteSegment, HermiteSegment]:
    apex = params.d_s + delta_h
    up = hermite_coeffs(params.d_b, apex, 0.0, 0.0, params.t_swing)
    down = hermite_coeffs(apex, params.d_b, 0.0, 0.0, params.t_swing)
    return up, down


def desired_foot_height(phi: float, params: FootTrajectoryParams, delta_h: float = 0.0) -> float:
    """Desired hip-frame foot height at leg phase ``phi``.

    Stance holds ``d_b``; the swing rises to ``d_s + delta_h`` at the peak
    phase and returns to ``d_b`` at 2 pi, both halves with zero end tangents.
    """
    if not 0.0 <= phi <= TWO_PI or math.isnan(phi):
        raise ValueError(f"phase {phi} outside [0, 2pi)")
    if delta_h < 0.0:
        raise ValueError(f"delta_h must be non-negative, got {delta_h}")
    if phi == TWO_PI:
        phi = 0.0
    if phi < params.t_stance:
        return params.d_b
    up, down = swing_segments(params, delta_h)
    if phi < params.t_peak:
        return hermite_eval(up, min(phi - params.t_stance, up.duration))
    return hermite_eval(down, min(phi - params.t_peak, down.duration))


def sample_trajectory(params: FootTrajectoryParams, delta_h: float = 0.0,
                      n: int = 360) -> np.ndarray:
    """(n, 2) array of (phase, height) over [0, 2 pi), e.g. for plotting."""
    phis = np.arange(n) * (TWO_PI / n)
    return np.column_stack([phis, [desired_foot_height(p, params, delta_h) for p in phis]])
