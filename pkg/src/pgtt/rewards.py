"""Per-step reward terms for the PGTT, MassLoco and Wild suites.

Every suite shares the common locomotion terms; each adds its own section.
Weights default to the printed table values. Three of them (joint torques,
foot slip, stand still) are printed positive although they act as
penalties; ``RewardWeights.sign_corrected()`` flips those to negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from pgtt.phase import N_LEGS, TWO_PI
from pgtt.swing import FootTrajectoryParams, desired_foot_height

N_JOINTS = 12


class Suite(str, Enum):
    PGTT = "pgtt"
    MASSLOCO = "massloco"
    WILD = "wild"

    @classmethod
    def parse(cls, value) -> "Suite":
        if isinstance(value, Suite):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown reward suite {value!r}; "
                             f"choose from {[s.value for s in cls]}") from None


COMMON_TERMS = (
    "lin_vel_tracking", "ang_vel_tracking", "lin_vel_z", "ang_vel_xy", "orientation",
    "termination", "joint_power", "action_rate", "joint_limits", "default_pose", "joint_torques",
)
SUITE_TERMS = {
    Suite.PGTT: ("foot_phase", "foot_contact"),
    Suite.MASSLOCO: ("foot_clearance", "foot_slip", "feet_air_time", "stand_still"),
    Suite.WILD: ("foot_clearance", "foot_slip"),
}


def suite_terms(suite) -> tuple[str, ...]:
    return COMMON_TERMS + SUITE_TERMS[Suite.parse(suite)]


@dataclass(frozen=True, eq=False)
class RewardInput:
    """Everything a single control step's reward depends on.

    Velocities are in the base (local) frame. ``foot_height_hip`` is the
    foot z in its hip frame, ``foot_height_world`` the world z, and
    ``foot_ground_z`` the terrain height directly under each foot.
    ``air_time`` holds each foot's accumulated flight time and
    ``first_contact`` marks feet touching down this step.
    """

    base_lin_vel: np.ndarray
    base_ang_vel: np.ndarray
    projected_gravity: np.ndarray
    joint_pos: np.ndarray
    joint_vel: np.ndarray
    joint_torque: np.ndarray
    action: np.ndarray
    last_action: np.ndarray
    contacts: np.ndarray
    foot_height_hip: np.ndarray
    foot_height_world: np.ndarray
    foot_ground_z: np.ndarray
    foot_vel_xy: np.ndarray
    phases: np.ndarray
    leg_h_max: np.ndarray
    leg_delta_h: np.ndarray
    air_time: np.ndarray
    first_contact: np.ndarray
    command: np.ndarray
    alive: bool
    q_def: np.ndarray
    q_min: np.ndarray
    q_max: np.ndarray

    _SHAPES = {
        "base_lin_vel": (3,), "base_ang_vel": (3,), "projected_gravity": (3,),
        "joint_pos": (N_JOINTS,), "joint_vel": (N_JOINTS,), "joint_torque": (N_JOINTS,),
        "action": (N_JOINTS,), "last_action": (N_JOINTS,), "contacts": (N_LEGS,),
        "foot_height_hip": (N_LEGS,), "foot_height_world": (N_LEGS,),
        "foot_ground_z": (N_LEGS,), "foot_vel_xy": (N_LEGS, 2), "phases": (N_LEGS,),
        "leg_h_max": (N_LEGS,), "leg_delta_h": (N_LEGS,), "air_time": (N_LEGS,),
        "first_contact": (N_LEGS,), "command": (3,),
        "q_def": (N_JOINTS,), "q_min": (N_JOINTS,), "q_max": (N_JOINTS,),
    }
    _BOOL = ("contacts", "first_contact")

    def __post_init__(self):
        for name, shape in self._SHAPES.items():
            dtype = bool if name in self._BOOL else float
            arr = np.asarray(getattr(self, name), dtype=dtype)
            if arr.shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "alive", bool(self.alive))

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(cls._SHAPES) + ("alive",)

    @classmethod
    def zeros(cls, **overrides) -> "RewardInput":
        values = {name: np.zeros(shape) for name, shape in cls._SHAPES.items()}
        values["alive"] = True
        values.update(overrides)
        return cls(**values)

    def to_dict(self) -> dict:
        out = {}
        for name in self.field_names():
            v = getattr(self, name)
            out[name] = v.tolist() if isinstance(v, np.ndarray) else v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RewardInput":
        missing = [n for n in cls.field_names() if n not in data]
        if missing:
            raise KeyError(missing[0])
        return cls(**{n: data[n] for n in cls.field_names()})


@dataclass(frozen=True)
class RewardWeights:
    lin_vel_tracking: float = 1.0
    ang_vel_tracking: float = 0.5
    lin_vel_z: float = -2.0
    ang_vel_xy: float = -0.05
    orientation: float = -0.2
    termination: float = -1.0
    joint_power: float = -2e-5
    action_rate: float = -0.01
    joint_limits: float = -1.0
    default_pose: float = -0.5
    joint_torques: float = 0.001
    foot_phase: float = 0.5
    foot_contact: float = -2.0
    massloco_foot_clearance: float = -0.5
    foot_slip: float = 0.1
    feet_air_time: float = 1.0
    stand_still: float = 0.5
    wild_foot_clearance: float = 0.1
    sigma_v: float = 0.25
    sigma_f: float = 0.05
    # per-joint weights for the default-pose term, legs FL FR RL RR x (hip, thigh, calf)
    default_pose_joint_weights: tuple[float, ...] = (1.0, 1.0, 0.5) * N_LEGS
    # MassLoco's desired swing height above the ground under the foot [m]
    massloco_swing_height: float = 0.08

    def __post_init__(self):
        for f in self.__dataclass_fields__:
            v = getattr(self, f)
            vals = v if isinstance(v, tuple) else (v,)
            if not all(math.isfinite(x) for x in vals):
                raise ValueError(f"reward weight {f} must be finite")
        if not (self.sigma_v > 0.0 and self.sigma_f > 0.0):
            raise ValueError("sigma_v and sigma_f must be positive")
        if len(self.default_pose_joint_weights) != N_JOINTS:
            raise ValueError(f"default_pose_joint_weights needs {N_JOINTS} entries")
        object.__setattr__(self, "default_pose_joint_weights",
                           tuple(float(x) for x in self.default_pose_joint_weights))

    def sign_corrected(self) -> "RewardWeights":
        return replace(self, joint_torques=-abs(self.joint_torques),
                       foot_slip=-abs(self.foot_slip), stand_still=-abs(self.stand_still))

    def weight(self, term: str, suite=Suite.PGTT) -> float:
        if term == "foot_clearance":
            suite = Suite.parse(suite)
            return self.massloco_foot_clearance if suite is Suite.MASSLOCO else self.wild_foot_clearance
        return getattr(self, term)


@dataclass
class RewardBreakdown:
    terms: dict[str, tuple[float, float]] = field(default_factory=dict)

    def add(self, name: str, raw: float, weight: float) -> None:
        self.terms[name] = (float(raw), float(raw) * float(weight))

    def merge(self, other: "RewardBreakdown") -> "RewardBreakdown":
        self.terms.update(other.terms)
        return self

    @property
    def total(self) -> float:
        return math.fsum(w for _, w in self.terms.values())

    def raw(self, name: str) -> float:
        return self.terms[name][0]

    def weighted(self, name: str) -> float:
        return self.terms[name][1]


def _swing_mask(phases: np.ndarray) -> np.ndarray:
    return (phases >= math.pi) & (phases < TWO_PI)


def common_rewards(inp: RewardInput, w: RewardWeights) -> RewardBreakdown:
    out = RewardBreakdown()
    lin_err = np.sum((inp.command[:2] - inp.base_lin_vel[:2]) ** 2)
    ang_err = (inp.command[2] - inp.base_ang_vel[2]) ** 2
    out.add("lin_vel_tracking", math.exp(-lin_err / w.sigma_v), w.lin_vel_tracking)
    out.add("ang_vel_tracking", math.exp(-ang_err / w.sigma_v), w.ang_vel_tracking)
    out.add("lin_vel_z", inp.base_lin_vel[2] ** 2, w.lin_vel_z)
    out.add("ang_vel_xy", np.sum(inp.base_ang_vel[:2] ** 2), w.ang_vel_xy)
    out.add("orientation", np.sum(inp.projected_gravity[:2] ** 2), w.orientation)
    out.add("termination", 0.0 if inp.alive else 1.0, w.termination)
    out.add("joint_power", np.sum(np.abs(inp.joint_torque) * np.abs(inp.joint_vel)), w.joint_power)
    out.add("action_rate", np.sum((inp.action - inp.last_action) ** 2), w.action_rate)
    out_of_range = (inp.joint_pos > inp.q_max) | (inp.joint_pos < inp.q_min)
    out.add("joint_limits", np.count_nonzero(out_of_range), w.joint_limits)
    dev = np.abs(inp.joint_pos - inp.q_def)
    out.add("default_pose", np.dot(dev, w.default_pose_joint_weights), w.default_pose)
    out.add("joint_torques", np.sum(inp.joint_torque ** 2), w.joint_torques)
    return out


def desired_heights(inp: RewardInput, params: FootTrajectoryParams) -> np.ndarray:
    return np.array([desired_foot_height(float(p), params, float(dh))
                     for p, dh in zip(inp.phases, inp.leg_delta_h)])


def foot_phase_reward(inp: RewardInput, params: FootTrajectoryParams,
                      w: RewardWeights) -> tuple[float, float]:
    """(raw, weighted) Gaussian tracking of the phase-driven foot height."""
    err = desired_heights(inp, params) - inp.foot_height_hip
    raw = float(np.sum(np.exp(-err ** 2 / w.sigma_f)))
    return raw, raw * w.foot_phase


def foot_contact_penalty(inp: RewardInput, w: RewardWeights) -> tuple[float, float]:
    raw = float(np.count_nonzero(_swing_mask(inp.phases) & inp.contacts))
    return raw, raw * w.foot_contact


def _foot_slip(inp: RewardInput) -> float:
    return float(np.sum(np.linalg.norm(inp.foot_vel_xy, axis=1) * inp.contacts))


def massloco_rewards(inp: RewardInput, w: RewardWeights) -> RewardBreakdown:
    out = RewardBreakdown()
    speed = np.linalg.norm(inp.foot_vel_xy, axis=1)
    target = inp.foot_ground_z + w.massloco_swing_height
    out.add("foot_clearance", np.sum((target - inp.foot_height_world) ** 2 * speed),
            w.massloco_foot_clearance)
    out.add("foot_slip", _foot_slip(inp), w.foot_slip)
    cmd_norm = np.linalg.norm(inp.command)
    moving = cmd_norm > 0.01
    air = np.sum((inp.air_time - 0.5) * inp.first_contact) if moving else 0.0
    out.add("feet_air_time", air, w.feet_air_time)
    still = np.sum(np.abs(inp.joint_pos - inp.q_def)) if cmd_norm < 0.01 else 0.0
    out.add("stand_still", still, w.stand_still)
    return out


def wild_rewards(inp: RewardInput, w: RewardWeights) -> RewardBreakdown:
    out = RewardBreakdown()
    above = inp.foot_height_world >= inp.leg_h_max
    out.add("foot_clearance", np.count_nonzero(_swing_mask(inp.phases) & above),
            w.wild_foot_clearance)
    out.add("foot_slip", _foot_slip(inp), w.foot_slip)
    return out


def total_reward(suite, inp: RewardInput, w: RewardWeights = RewardWeights(),
                 traj: FootTrajectoryParams = FootTrajectoryParams()) -> RewardBreakdown:
    suite = Suite.parse(suite)
    out = common_rewards(inp, w)
    if suite is Suite.PGTT:
        raw, _ = foot_phase_reward(inp, traj, w)
        out.add("foot_phase", raw, w.foot_phase)
        raw, _ = foot_contact_penalty(inp, w)
        out.add("foot_contact", raw, w.foot_contact)
    elif suite is Suite.MASSLOCO:
        out.merge(massloco_rewards(inp, w))
    else:
        out.merge(wild_rewards(inp, w))
    return out
