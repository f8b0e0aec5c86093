"""Scripted kinematic rollouts standing in for a physics engine.

The harness drives an idealised quadruped over a height field: the base
integrates the velocity command at the 50 Hz control rate, each foot
follows a configurable height driver under its hip, joint angles come from
a planar two-link leg, and every step records the full reward input, the
reward breakdown and the robot-centric heightmap. Episodes are
deterministic per seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from pgtt.elevation import (FootprintError, HeightmapSpec, Pose2D, leg_local_stats,
                            sample_robot_heightmap)
from pgtt.grids import HeightField
from pgtt.phase import GaitConfig, LEG_NAMES, N_LEGS, in_swing, phases_at
from pgtt.rewards import N_JOINTS, RewardInput, RewardWeights, Suite, total_reward
from pgtt.swing import FootTrajectoryParams, desired_foot_height

CONTROL_DT = 0.02
PHYSICS_DT = 0.005
JOINT_NAMES = tuple(f"{leg}_{j}_joint" for leg in LEG_NAMES for j in ("hip", "thigh", "calf"))


def leg_ik(z_hip: float, thigh: float, calf: float) -> tuple[float, float, float]:
    """(hip, thigh, knee) angles placing the foot ``-z_hip`` straight below the hip.

    Planar two-link leg with the knee bent backwards; the reach is clipped
    to the workspace.
    """
    d = min(max(-z_hip, 1e-3), thigh + calf - 1e-9)
    cos_knee = (d * d - thigh * thigh - calf * calf) / (2.0 * thigh * calf)
    knee = -math.acos(max(-1.0, min(1.0, cos_knee)))
    cos_b = (thigh * thigh + d * d - calf * calf) / (2.0 * thigh * d)
    return 0.0, math.acos(max(-1.0, min(1.0, cos_b))), knee


@dataclass(frozen=True)
class RobotModel:
    joint_names: tuple[str, ...] = JOINT_NAMES
    q_def: tuple[float, ...] = ()
    q_min: tuple[float, ...] = (-1.05, -1.57, -2.72) * N_LEGS
    q_max: tuple[float, ...] = (1.05, 3.49, -0.84) * N_LEGS
    hip_positions: tuple[tuple[float, float, float], ...] = (
        (0.1934, 0.142, 0.0), (0.1934, -0.142, 0.0),
        (-0.1934, 0.142, 0.0), (-0.1934, -0.142, 0.0),
    )
    thigh_length: float = 0.213
    calf_length: float = 0.213
    action_scale: float = 0.25
    kp: float = 60.0
    kd: float = 3.0
    nominal_base_height: float = 0.30
    mass: float = 15.0

    def __post_init__(self):
        if not self.q_def:
            # stand pose: stance foot at the nominal base height below the hip
            leg = leg_ik(-self.nominal_base_height, self.thigh_length, self.calf_length)
            object.__setattr__(self, "q_def", leg * N_LEGS)
        for name in ("q_def", "q_min", "q_max"):
            v = tuple(float(x) for x in getattr(self, name))
            if len(v) != N_JOINTS:
                raise ValueError(f"{name} needs {N_JOINTS} entries")
            object.__setattr__(self, name, v)
        if not all(lo < q < hi for lo, q, hi in zip(self.q_min, self.q_def, self.q_max)):
            raise ValueError("require q_min < q_def < q_max for every joint")
        if not self.action_scale > 0.0:
            raise ValueError("action_scale must be positive")
        object.__setattr__(self, "hip_positions",
                           tuple(tuple(float(c) for c in p) for p in self.hip_positions))

    def joint_angles(self, foot_z_hip) -> np.ndarray:
        return np.array([a for z in foot_z_hip
                         for a in leg_ik(float(z), self.thigh_length, self.calf_length)])


def scale_action(a, model: RobotModel) -> np.ndarray:
    return np.asarray(model.q_def) + model.action_scale * np.asarray(a, dtype=float)


def pd_torque(q_des, q, qd, model: RobotModel, kp: float | None = None,
              kd: float | None = None) -> np.ndarray:
    kp = model.kp if kp is None else kp
    kd = model.kd if kd is None else kd
    return kp * (np.asarray(q_des, float) - np.asarray(q, float)) - kd * np.asarray(qd, float)


@dataclass(frozen=True)
class CommandSampler:
    u_min: tuple[float, float, float] = (-1.0, -1.0, -1.0)
    u_max: tuple[float, float, float] = (1.0, 1.0, 1.0)
    eval_scale: float = 0.7

    def __post_init__(self):
        if any(lo > hi for lo, hi in zip(self.u_min, self.u_max)):
            raise ValueError("u_min must not exceed u_max")


def sample_command(rng: np.random.Generator, sampler: CommandSampler = CommandSampler(),
                   evaluation: bool = False) -> np.ndarray:
    cmd = rng.uniform(sampler.u_min, sampler.u_max)
    return cmd * sampler.eval_scale if evaluation else cmd


def resample_event(rng: np.random.Generator, episode_length: int) -> int:
    if episode_length < 1:
        raise ValueError("episode_length must be >= 1")
    return int(rng.integers(episode_length))


@dataclass(frozen=True)
class DomainRandomization:
    noise_std: dict = field(default_factory=lambda: {
        "ang_vel": 0.2, "gravity": 0.05, "joint_pos": 0.01, "joint_vel": 1.5,
        "cos_phase": 0.0, "sin_phase": 0.0, "heightmap": 0.02, "last_action": 0.0,
    })
    base_mass_scale: tuple[float, float] = (0.9, 1.1)
    link_mass_scale: tuple[float, float] = (0.9, 1.1)
    q_def_offset: tuple[float, float] = (-0.05, 0.05)
    kp: tuple[float, float] = (54.0, 66.0)
    kd: tuple[float, float] = (2.7, 3.3)
    actuator_friction: tuple[float, float] = (0.0, 0.05)
    terrain_friction: tuple[float, float] = (0.4, 1.2)

    def __post_init__(self):
        for name in ("base_mass_scale", "link_mass_scale", "q_def_offset", "kp", "kd",
                     "actuator_friction", "terrain_friction"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: empty range ({lo}, {hi})")
        for block, std in self.noise_std.items():
            if block not in NOISY_BLOCKS:
                raise ValueError(f"noise on block {block!r} is not allowed")
            if std < 0.0:
                raise ValueError(f"noise std for {block} must be non-negative")

    @classmethod
    def nominal(cls, model: RobotModel = RobotModel()) -> "DomainRandomization":
        return cls(noise_std={}, base_mass_scale=(1.0, 1.0), link_mass_scale=(1.0, 1.0),
                   q_def_offset=(0.0, 0.0), kp=(model.kp, model.kp), kd=(model.kd, model.kd),
                   actuator_friction=(0.0, 0.0), terrain_friction=(1.0, 1.0))


@dataclass(frozen=True)
class RealizedParameters:
    base_mass_scale: float
    link_mass_scale: float
    q_def_offset: tuple[float, ...]
    kp: float
    kd: float
    actuator_friction: float
    terrain_friction: float


def sample_randomization(dr: DomainRandomization, rng: np.random.Generator) -> RealizedParameters:
    u = lambda r: float(rng.uniform(*r))  # noqa: E731
    return RealizedParameters(
        base_mass_scale=u(dr.base_mass_scale),
        link_mass_scale=u(dr.link_mass_scale),
        q_def_offset=tuple(float(x) for x in rng.uniform(*dr.q_def_offset, size=N_JOINTS)),
        kp=u(dr.kp),
        kd=u(dr.kd),
        actuator_friction=u(dr.actuator_friction),
        terrain_friction=u(dr.terrain_friction),
    )


OBS_BLOCKS = ("ang_vel", "gravity", "joint_pos", "joint_vel", "cos_phase", "sin_phase",
              "heightmap", "frequency", "last_action", "command")
NOISY_BLOCKS = ("ang_vel", "gravity", "joint_pos", "joint_vel", "cos_phase", "sin_phase",
                "heightmap", "last_action")


@dataclass(frozen=True)
class ObservationManifest:
    """Offsets of every block in the policy observation and critic state."""

    heightmap_size: int = 99

    @property
    def dims(self) -> dict[str, int]:
        return {"ang_vel": 3, "gravity": 3, "joint_pos": N_JOINTS, "joint_vel": N_JOINTS,
                "cos_phase": N_LEGS, "sin_phase": N_LEGS, "heightmap": self.heightmap_size,
                "frequency": 1, "last_action": N_JOINTS, "command": 3}

    @property
    def slices(self) -> dict[str, slice]:
        out, start = {}, 0
        for name, n in self.dims.items():
            out[name] = slice(start, start + n)
            start += n
        return out

    @property
    def obs_size(self) -> int:
        return sum(self.dims.values())

    @property
    def state_size(self) -> int:
        return self.obs_size + 3

    def to_dict(self) -> dict[str, list[int]]:
        return {k: [s.start, s.stop] for k, s in self.slices.items()}


def assemble_observation(parts: dict, manifest: ObservationManifest) -> np.ndarray:
    blocks = []
    for name, n in manifest.dims.items():
        if name not in parts:
            raise ValueError(f"missing observation block {name!r}")
        b = np.atleast_1d(np.asarray(parts[name], dtype=float)).ravel()
        if b.size != n:
            raise ValueError(f"block {name!r}: expected {n} values, got {b.size}")
        blocks.append(b)
    extra = set(parts) - set(manifest.dims)
    if extra:
        raise ValueError(f"unknown observation blocks {sorted(extra)}")
    return np.concatenate(blocks)


def split_observation(obs: np.ndarray, manifest: ObservationManifest) -> dict[str, np.ndarray]:
    if obs.shape != (manifest.obs_size,):
        raise ValueError(f"observation must have length {manifest.obs_size}")
    return {k: obs[s] for k, s in manifest.slices.items()}


def privileged_state(obs: np.ndarray, base_lin_vel) -> np.ndarray:
    v = np.asarray(base_lin_vel, dtype=float)
    if v.shape != (3,):
        raise ValueError("base linear velocity must have 3 components")
    return np.concatenate([obs, v])


def apply_sensor_noise(obs: np.ndarray, dr: DomainRandomization, rng: np.random.Generator,
                       manifest: ObservationManifest) -> np.ndarray:
    # frequency and command are policy inputs, not sensors, so they stay clean
    out = np.array(obs, dtype=float, copy=True)
    for name, sl in manifest.slices.items():
        std = dr.noise_std.get(name, 0.0)
        if std > 0.0:
            out[sl] += rng.normal(0.0, std, size=sl.stop - sl.start)
    return out


def check_termination(rotation: np.ndarray) -> bool:
    """Upside down: the body z axis points below the horizon."""
    return float(np.asarray(rotation)[2, 2]) < 0.0


def rotation_rpy(roll: float, pitch: float, yaw: float) -> np.ndarray:
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return rz @ ry @ rx


def _tilt_rotation(tilt: float, direction: float) -> np.ndarray:
    # rotation by ``tilt`` about the horizontal axis perpendicular to ``direction``
    ax, ay = -math.sin(direction), math.cos(direction)
    c, s = math.cos(tilt), math.sin(tilt)
    k = np.array([[0.0, 0.0, ay], [0.0, 0.0, -ax], [-ay, ax, 0.0]])
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


@dataclass(frozen=True)
class PerturbationSchedule:
    magnitude: tuple[float, float] = (7.5, 30.0)
    duration: tuple[float, float] = (0.1, 0.5)
    wait: tuple[float, float] = (1.0, 3.0)
    # kinematic stand-in for balance: body tilt [rad] per m/s of push velocity
    tilt_gain: float = 2.0
    decay_time: float = 0.5

    def __post_init__(self):
        for name in ("magnitude", "duration", "wait"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo <= hi:
                raise ValueError(f"{name}: invalid range ({lo}, {hi})")


@dataclass(frozen=True)
class Push:
    start: float
    duration: float
    force: float
    direction: float


def sample_pushes(rng: np.random.Generator, schedule: PerturbationSchedule,
                  horizon: float) -> list[Push]:
    pushes = []
    t = float(rng.uniform(*schedule.wait))
    while t < horizon:
        dur = float(rng.uniform(*schedule.duration))
        pushes.append(Push(t, dur, float(rng.uniform(*schedule.magnitude)),
                           float(rng.uniform(0.0, 2.0 * math.pi))))
        t += dur + float(rng.uniform(*schedule.wait))
    return pushes


DRIVERS = ("exact", "bias", "noise", "drag")


@dataclass(frozen=True)
class DriverConfig:
    """How the scripted feet move.

    ``exact`` tracks the desired height, ``bias`` adds a fixed per-foot
    offset, ``noise`` adds Gaussian noise each step and ``drag`` never lifts
    the feet.
    """

    kind: str = "exact"
    bias: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    noise_std: float = 0.01

    def __post_init__(self):
        if self.kind not in DRIVERS:
            raise ValueError(f"unknown driver {self.kind!r}; choose from {DRIVERS}")


def drive_feet(driver: DriverConfig, desired: np.ndarray, phases, d_b: float,
               rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Foot heights in the hip frame and whether each foot is executing a swing."""
    swinging = np.array([in_swing(p) for p in phases])
    if driver.kind == "exact":
        return desired.copy(), swinging
    if driver.kind == "bias":
        return desired + np.asarray(driver.bias), swinging
    if driver.kind == "noise":
        return desired + rng.normal(0.0, driver.noise_std, size=N_LEGS), swinging
    return np.full(N_LEGS, d_b), np.zeros(N_LEGS, bool)


@dataclass(frozen=True)
class HarnessConfig:
    length: int = 1000
    suite: str = "pgtt"
    driver: DriverConfig = DriverConfig()
    contact_tolerance: float = 0.005
    leg_window: float = 0.2
    evaluation: bool = False
    perturb: bool = False
    randomize: bool = False
    observation_noise: bool = False
    record_observations: bool = False

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("episode length must be >= 1")
        Suite.parse(self.suite)


@dataclass
class RolloutTrace:
    header: dict
    steps: list[dict]
    terminated: bool = False
    truncated: bool = False

    @property
    def footer(self) -> dict:
        return {"type": "footer", "steps": len(self.steps), "terminated": self.terminated,
                "truncated": self.truncated}

    def rewards(self, term: str | None = None, weighted: bool = False) -> np.ndarray:
        if term is None:
            return np.array([s["reward"]["total"] for s in self.steps])
        return np.array([s["reward"]["terms"][term][1 if weighted else 0] for s in self.steps])


def _floats(a) -> list:
    return [float(x) for x in np.asarray(a, dtype=float).ravel()]


def _plain(obj):
    # dataclass dumps hold tuples; traces store what JSON reads back
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def scripted_rollout(terrain: HeightField, seed: int, *,
                     model: RobotModel = RobotModel(),
                     gait: GaitConfig = GaitConfig(),
                     traj: FootTrajectoryParams = FootTrajectoryParams(),
                     weights: RewardWeights = RewardWeights(),
                     spec: HeightmapSpec = HeightmapSpec(),
                     sampler: CommandSampler = CommandSampler(),
                     schedule: Optional[PerturbationSchedule] = None,
                     dr: DomainRandomization = DomainRandomization(),
                     config: HarnessConfig = HarnessConfig(),
                     command: Optional[np.ndarray] = None,
                     start_pose: Pose2D = Pose2D(),
                     terrain_id: str = "") -> RolloutTrace:
    """Run one deterministic episode; see the module docstring for the model.

    A foot is in contact when it is within ``contact_tolerance`` of the
    ground and not executing a swing, or whenever it sinks more than the
    tolerance below the ground. If ``command`` is given it is held for the
    whole episode instead of sampled and resampled.
    """
    rng = np.random.default_rng(seed)
    suite = Suite.parse(config.suite)
    n = config.length
    if command is None:
        cmd = sample_command(rng, sampler, config.evaluation)
        resample_at = resample_event(rng, n)
        cmd_after = sample_command(rng, sampler, config.evaluation)
    else:
        cmd = np.asarray(command, dtype=float)
        resample_at, cmd_after = -1, cmd
    pushes = sample_pushes(rng, schedule, n * CONTROL_DT) if (config.perturb and schedule) else []
    realized = sample_randomization(dr if config.randomize else DomainRandomization.nominal(model),
                                    rng)
    noise_rng = np.random.default_rng([seed, 1])
    manifest = ObservationManifest(spec.size)
    mass = model.mass * realized.base_mass_scale

    header = _plain({
        "type": "header", "format": "pgtt-trace", "version": 1, "seed": int(seed),
        "suite": suite.value, "driver": asdict(config.driver), "length": n,
        "dt": CONTROL_DT, "physics_dt": PHYSICS_DT, "terrain_id": terrain_id,
        "gait": asdict(gait), "trajectory": asdict(traj), "weights": asdict(weights),
        "heightmap_spec": asdict(spec), "contact_tolerance": config.contact_tolerance,
        "leg_window": config.leg_window,
        "command": _floats(cmd), "resample_step": resample_at, "command_after": _floats(cmd_after),
        "pushes": [asdict(p) for p in pushes], "randomization": asdict(realized),
        "q_def": model.q_def, "q_min": model.q_min, "q_max": model.q_max,
    })
    trace = RolloutTrace(header, [])

    x, y, yaw = start_pose.x, start_pose.y, start_pose.yaw
    push_v = np.zeros(2)
    push_dir = 0.0
    q_prev = None
    last_action = np.zeros(N_JOINTS)
    prev_contact = None
    air = np.zeros(N_LEGS)
    hips = np.array(model.hip_positions)
    q_def = np.asarray(model.q_def)

    for k in range(n):
        t = k * CONTROL_DT
        if k == resample_at:
            cmd = cmd_after
        if not terrain.contains(x, y):
            trace.truncated = True
            break

        for p in pushes:
            if p.start <= t < p.start + p.duration:
                acc = p.force / mass * CONTROL_DT
                push_v += acc * np.array([math.cos(p.direction), math.sin(p.direction)])
        speed = float(np.hypot(*push_v))
        if speed > 0.0:
            push_dir = math.atan2(push_v[1], push_v[0])
        tilt = schedule.tilt_gain * speed if schedule is not None else 0.0
        rot = _tilt_rotation(tilt, push_dir) @ rotation_rpy(0.0, 0.0, yaw)
        terminated = check_termination(rot)

        c, s = math.cos(yaw), math.sin(yaw)
        v_world = np.array([c * cmd[0] - s * cmd[1], s * cmd[0] + c * cmd[1]]) + push_v
        lin_vel = rot.T @ np.array([v_world[0], v_world[1], 0.0])
        ang_vel = rot.T @ np.array([0.0, 0.0, cmd[2]])
        gravity = rot.T @ np.array([0.0, 0.0, -1.0])

        base_ground = terrain.height_at(x, y)
        base_z = base_ground + model.nominal_base_height
        pose = Pose2D(x, y, yaw)
        try:
            hmap = sample_robot_heightmap(terrain, pose, spec)
            feet_xy = np.array([[x + c * hx - s * hy, y + s * hx + c * hy] for hx, hy, _ in hips])
            stats = [leg_local_stats(terrain, f, config.leg_window) for f in feet_xy]
            ground = np.array([terrain.height_at(*f) for f in feet_xy])
        except (FootprintError, IndexError):
            trace.truncated = True
            break

        phases = np.array(phases_at(gait, t))
        dh = np.array([st.delta_h for st in stats])
        h_max = np.array([st.h_max for st in stats])
        desired = np.array([desired_foot_height(float(p), traj, float(d))
                            for p, d in zip(phases, dh)])
        foot_hip, swinging = drive_feet(config.driver, desired, phases, traj.d_b, rng)
        foot_world = base_z + hips[:, 2] + foot_hip
        clearance = foot_world - ground
        tol = config.contact_tolerance
        contact = (clearance <= -tol) | ((clearance <= tol) & ~swinging)
        if prev_contact is None:
            prev_contact = contact
        first_contact = contact & ~prev_contact
        air = air + CONTROL_DT

        q = model.joint_angles(foot_hip)
        qd = np.zeros(N_JOINTS) if q_prev is None else (q - q_prev) / CONTROL_DT
        next_phases = phases_at(gait, t + CONTROL_DT)
        next_desired = [desired_foot_height(p, traj, float(d)) for p, d in zip(next_phases, dh)]
        action = (model.joint_angles(next_desired) - q_def) / model.action_scale
        tau = pd_torque(scale_action(action, model), q, qd, model, realized.kp, realized.kd)
        if k == 0:
            foot_vel = np.tile(v_world, (N_LEGS, 1))
        else:
            foot_vel = (feet_xy - prev_feet) / CONTROL_DT

        inp = RewardInput(
            base_lin_vel=lin_vel, base_ang_vel=ang_vel, projected_gravity=gravity,
            joint_pos=q, joint_vel=qd, joint_torque=tau, action=action, last_action=last_action,
            contacts=contact, foot_height_hip=foot_hip, foot_height_world=foot_world,
            foot_ground_z=ground, foot_vel_xy=foot_vel, phases=phases, leg_h_max=h_max,
            leg_delta_h=dh, air_time=air, first_contact=first_contact, command=cmd,
            alive=not terminated, q_def=model.q_def, q_min=model.q_min, q_max=model.q_max,
        )
        breakdown = total_reward(suite, inp, weights, traj)
        record = {
            "type": "step", "k": k, "t": t,
            "base_pose": [x, y, base_z, yaw],
            "heightmap": _floats(hmap.flat()),
            "heightmap_clamped": hmap.clamped,
            "reward_input": inp.to_dict(),
            "reward": {"terms": {name: list(v) for name, v in breakdown.terms.items()},
                       "total": breakdown.total},
            "terminated": terminated,
        }
        if config.record_observations:
            obs = assemble_observation({
                "ang_vel": ang_vel, "gravity": gravity, "joint_pos": q, "joint_vel": qd,
                "cos_phase": np.cos(phases), "sin_phase": np.sin(phases),
                "heightmap": hmap.relative(base_z), "frequency": gait.base_frequency,
                "last_action": last_action, "command": cmd,
            }, manifest)
            if config.observation_noise:
                obs = apply_sensor_noise(obs, dr, noise_rng, manifest)
            record["observation"] = _floats(obs)
            record["privileged_state"] = _floats(privileged_state(obs, lin_vel))
        trace.steps.append(record)
        if terminated:
            trace.terminated = True
            break

        air = air * ~contact
        prev_contact = contact
        prev_feet = feet_xy
        q_prev = q
        last_action = action
        x += v_world[0] * CONTROL_DT
        y += v_world[1] * CONTROL_DT
        yaw += cmd[2] * CONTROL_DT
        if schedule is not None:
            push_v = push_v * math.exp(-CONTROL_DT / schedule.decay_time)

    return trace
