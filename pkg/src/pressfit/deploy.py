"""Closed-loop deployment: sampled strategies through the admittance arm.

Two nested rates: every model tick the threaded encoder consumes the current
goal-relative state plus the last commanded wrench and a new wrench is drawn
from the predicted mixture; every control tick the admittance step chases
that reference against the measured contact wrench while the part, rigidly
carried by the tool, interacts with the fixture.

The force/torque measurement follows the sensor convention: it reports the
wrench the part exerts on the environment (the negative contact reaction),
which closes the loop with negative feedback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import contact, lstm, mdn
from .admittance import ControlDiagnostics, ControllerConfig, control_step, post_scale
from .arm import ArmModel, ArmState, forward_kinematics, inverse_kinematics
from .checkpoint import Checkpoint
from .config import SimConfig
from .engine import SimState, random_start
from .errors import ConfigError
from .features import FEATURE_DIM, feature_vector
from .geometry import Pose, Twist, Wrench, ZERO_WRENCH
from .network import LstmMdn
from .recording import Demonstration


class ZeroPolicy:
    """Baseline: never commands any wrench."""

    def reset(self) -> None:
        pass

    def observe(self, pose: Pose, twist: Twist, last_cmd: Wrench) -> None:
        pass

    def decide(self, rng: np.random.Generator) -> Wrench:
        return ZERO_WRENCH


class ReplayPolicy:
    """Open-loop replay of a recorded demonstration's commands, one per tick."""

    def __init__(self, demo: Demonstration):
        self.demo = demo
        self.index = 0

    def reset(self) -> None:
        self.index = 0

    def observe(self, pose, twist, last_cmd) -> None:
        pass

    def decide(self, rng) -> Wrench:
        i = min(self.index, len(self.demo.samples) - 1)
        self.index += 1
        return self.demo.samples[i].wrench


class ModelPolicy:
    """Threads the encoder over the feature stream and samples at model ticks.

    The encoder consumes goal-relative state at its native recording cadence
    (`observe`, called at the feature rate between command ticks) so its
    context always matches training windows; `decide` samples a wrench from
    the current mixture at the slower model rate. The first observation
    back-fills a full still-start window, which mirrors the idle prefix of
    recorded demonstrations.
    """

    def __init__(self, ckpt: Checkpoint, temperature: float = 1.0,
                 goal_shift: tuple[float, float, float] = (0.0, 0.0, 0.0)):
        if ckpt.dims.c != FEATURE_DIM or ckpt.dims.d != 3:
            raise ConfigError(
                f"checkpoint dims (c={ckpt.dims.c}, d={ckpt.dims.d}) do not match "
                f"the planar deployment (c={FEATURE_DIM}, d=3)"
            )
        self.ckpt = ckpt
        self.model = LstmMdn(ckpt.dims)
        self.temperature = temperature
        self.goal_shift = goal_shift
        self.state: lstm.LstmState | None = None
        self.mixture: mdn.MixtureParams | None = None
        self.feature_history: list[np.ndarray] = []

    def reset(self) -> None:
        self.state = None
        self.mixture = None
        self.feature_history = []

    def observe(self, pose: Pose, twist: Twist, last_cmd: Wrench) -> None:
        raw = feature_vector(pose, twist, last_cmd, self.goal_shift)
        x = self.ckpt.norm_stats.apply(raw)
        if self.state is None:
            for _ in range(self.ckpt.dims.n_history):
                self.feature_history.append(x)
                self.state, _ = self.model.step_state(self.ckpt.params, self.state, x)
        self.feature_history.append(x)
        self.state, self.mixture = self.model.step_state(self.ckpt.params, self.state, x)

    def decide(self, rng: np.random.Generator) -> Wrench:
        if self.mixture is None:
            return ZERO_WRENCH
        y = mdn.sample(self.mixture, rng, self.temperature)
        w = self.ckpt.norm_stats.invert_wrench(y)
        return Wrench(float(w[0]), float(w[1]), float(w[2]))


@dataclass
class EpisodeLog:
    success: bool
    fault: bool
    duration: float
    final_distance: float
    model_ticks: int
    control_steps: int
    steps_per_tick: int
    regularized_solves: int
    # model-tick traces
    tick_t: list[float] = field(default_factory=list)
    tick_distance: list[float] = field(default_factory=list)
    tick_f_ref: list[tuple[float, float, float]] = field(default_factory=list)
    # full control-rate trace (optional)
    rows: list[tuple] = field(default_factory=list)

    CSV_HEADER = (
        "t,q1,q2,q3,x,z,theta,vx,vz,omega,"
        "fref_x,fref_z,fref_tau,fmeas_x,fmeas_z,fmeas_tau,goal_distance"
    )

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for row in self.rows:
            lines.append(",".join(repr(v) for v in row))
        return "\n".join(lines) + "\n"


def deploy(
    policy,
    sim_cfg: SimConfig,
    ctrl_cfg: ControllerConfig,
    rng: np.random.Generator,
    max_time: float = 30.0,
    success_threshold: float = 0.001,
    start: SimState | None = None,
    arm_model: ArmModel | None = None,
    record_rows: bool = False,
) -> EpisodeLog:
    """Run one episode until the goal distance crosses the threshold or the
    time budget expires (expiry counts as failure)."""
    arm_model = arm_model or ArmModel()
    state = start if start is not None else random_start(sim_cfg, rng)
    q0 = inverse_kinematics(arm_model, state.pose)
    arm_state = ArmState(q0, (0.0, 0.0, 0.0))
    pose, twist = forward_kinematics(arm_model, arm_state)

    policy.reset()
    diag = ControlDiagnostics()
    steps_per_tick = ctrl_cfg.steps_per_tick
    steps_per_feature = ctrl_cfg.steps_per_feature
    n_ticks = int(math.ceil(max_time * ctrl_cfg.model_rate))
    last_cmd = ZERO_WRENCH
    t = 0.0
    log = EpisodeLog(
        success=False, fault=False, duration=0.0,
        final_distance=math.hypot(pose.x, pose.z),
        model_ticks=0, control_steps=0, steps_per_tick=steps_per_tick,
        regularized_solves=0,
    )

    # State feedback flows into the encoder at its native cadence; commands
    # are drawn at the slower model rate and held in between.
    policy.observe(pose, twist, last_cmd)
    done = False
    for _ in range(n_ticks):
        if done:
            break
        cmd = policy.decide(rng)
        if not cmd.is_finite():
            log.fault = True
            break
        cmd = cmd.clamped(sim_cfg.wrench_limits)
        if ctrl_cfg.post_scale != 1.0:
            cmd = post_scale(cmd, ctrl_cfg.post_scale)
        last_cmd = cmd
        log.model_ticks += 1
        log.tick_t.append(t)
        log.tick_distance.append(math.hypot(pose.x, pose.z))
        log.tick_f_ref.append(cmd.as_tuple())

        for j in range(1, steps_per_tick + 1):
            reaction = contact.contact_resolve(pose, twist, sim_cfg)
            f_meas = Wrench(-reaction.fx, -reaction.fz, -reaction.tau)
            arm_state = control_step(ctrl_cfg, arm_model, arm_state, cmd, f_meas, diag)
            pose, twist = forward_kinematics(arm_model, arm_state)
            t += ctrl_cfg.sim_dt
            if not (pose.is_finite() and twist.is_finite()):
                log.fault = True
                done = True
                break
            if j % steps_per_feature == 0:
                policy.observe(pose, twist, last_cmd)
            dist = math.hypot(pose.x, pose.z)
            if record_rows:
                log.rows.append(
                    (t, *arm_state.q, pose.x, pose.z, pose.theta,
                     twist.vx, twist.vz, twist.omega,
                     *cmd.as_tuple(), *f_meas.as_tuple(), dist)
                )
            if dist <= success_threshold:
                log.success = True
                done = True
                break

    log.duration = t
    log.final_distance = math.hypot(pose.x, pose.z)
    log.control_steps = diag.control_steps
    log.regularized_solves = diag.regularized_solves
    if log.fault:
        log.success = False
    return log
