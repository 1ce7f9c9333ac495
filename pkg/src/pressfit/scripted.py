"""Scripted stochastic demonstrator: a funnel policy with human-like variance.

Approach above the mouth, center laterally, descend with compliance, rattle
free when progress stalls, press home. Commands are re-decided at a
human-like cadence (roughly 4-10 Hz) and held constant in between, the way a
hand on a spring-centered stick behaves; per-demonstration skill factors and
time-correlated (Ornstein-Uhlenbeck) noise at the decision points spread the
durations so quartile studies have structure. Failed attempts (timeouts) are
discarded; recorded sets contain only successful assemblies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SimConfig, config_hash
from .engine import SimState, goal_distance, random_start, step
from .errors import ConfigError
from .geometry import Wrench, wrap_angle
from .recording import DemoSample, Demonstration


@dataclass
class DemonstratorConfig:
    success_threshold: float = 0.0005
    timeout: float = 40.0
    hold_range: tuple[float, float] = (0.10, 0.25)  # command re-decision period
    command_lag: float = 0.06  # first-order hand-dynamics filter, s
    lateral_kp: float = 150.0
    lateral_kd: float = 20.0
    turn_kp: float = 0.25
    turn_kd: float = 0.02
    descend_speed: float = 0.03
    speed_kff: float = 80.0   # feedforward on the damped plant
    speed_kd: float = 40.0
    press_force: float = 5.0
    jiggle_force: float = 3.0
    jiggle_hz: float = 1.5
    noise_sigma: tuple[float, float, float] = (0.6, 0.5, 0.015)
    noise_tau: float = 0.4    # OU correlation across decisions; <= 0 gives white
    stall_decisions: int = 2  # stalled re-decisions before rattling
    stall_progress: float = 0.0003


class _Noise:
    """Stationary OU process per wrench axis (white noise when tau <= 0)."""

    def __init__(self, sigma, tau, decision_dt, rng, scale):
        self.sigma = [s * scale for s in sigma]
        self.rng = rng
        self.white = tau <= 0.0
        if not self.white:
            self.decay = math.exp(-decision_dt / tau)
            self.kick = math.sqrt(1.0 - self.decay**2)
        self.state = [0.0, 0.0, 0.0]

    def sample(self):
        if self.white:
            self.state = [s * self.rng.standard_normal() for s in self.sigma]
        else:
            self.state = [
                self.decay * v + self.kick * s * self.rng.standard_normal()
                for v, s in zip(self.state, self.sigma)
            ]
        return self.state


class FunnelPolicy:
    """Stateful scripted teleoperator for one episode."""

    def __init__(self, sim_cfg: SimConfig, demo_cfg: DemonstratorConfig,
                 rng: np.random.Generator):
        self.sim = sim_cfg
        self.cfg = demo_cfg
        self.rng = rng
        # Per-demonstration skill: tempo, noisiness, press strength, rattle
        # style. Slow noisy episodes emulate low-quality demonstrations.
        self.speed = rng.uniform(0.8, 1.25)
        self.noise_scale = rng.uniform(0.5, 1.2)
        self.press = demo_cfg.press_force * rng.uniform(0.85, 1.3)
        self.jiggle_phase = rng.uniform(0.0, 2.0 * math.pi)
        self.jiggle_gain = demo_cfg.jiggle_force * rng.uniform(0.7, 1.5)
        mean_hold = 0.5 * (demo_cfg.hold_range[0] + demo_cfg.hold_range[1])
        self.noise = _Noise(demo_cfg.noise_sigma, demo_cfg.noise_tau,
                            mean_hold, rng, self.noise_scale)
        self._target = Wrench(0.0, 0.0, 0.0)
        self._applied = Wrench(0.0, 0.0, 0.0)
        self._blend = 1.0 - math.exp(-sim_cfg.dt / max(demo_cfg.command_lag, 1e-6))
        # Brief look-at-the-scene pause before acting, like a human operator;
        # also matches the still-start history deployment begins from.
        self._next_decision = rng.uniform(0.15, 0.6)
        self._decision_dist = None
        self._stalled = 0
        self._jiggle_until = -1.0

    def wrench(self, state: SimState) -> Wrench:
        if state.t >= self._next_decision:
            self._target = self._decide(state)
            lo, hi = self.cfg.hold_range
            self._next_decision = state.t + self.rng.uniform(lo, hi)
        # Commands approach the decided target through hand-lag dynamics, so
        # recorded signals vary smoothly instead of stepping.
        b = self._blend
        self._applied = Wrench(
            self._applied.fx + b * (self._target.fx - self._applied.fx),
            self._applied.fz + b * (self._target.fz - self._applied.fz),
            self._applied.tau + b * (self._target.tau - self._applied.tau),
        )
        return self._applied

    def _decide(self, state: SimState) -> Wrench:
        cfg, sim = self.cfg, self.sim
        pose, twist = state.pose, state.twist
        dist = goal_distance(state)

        # Stall bookkeeping at decision cadence: no goal progress in contact.
        if self._decision_dist is not None and state.in_contact:
            if self._decision_dist - dist < cfg.stall_progress:
                self._stalled += 1
            else:
                self._stalled = 0
        self._decision_dist = dist
        if (
            self._stalled >= cfg.stall_decisions
            and pose.z > 0.002
            and state.t > self._jiggle_until
        ):
            self._jiggle_until = state.t + self.rng.uniform(0.8, 2.0)
            self._stalled = 0

        nx, nz, nt = self.noise.sample()

        # Lateral centering and upright alignment, always active.
        fx = cfg.lateral_kp * (-pose.x) - cfg.lateral_kd * twist.vx + nx
        tau = cfg.turn_kp * (-wrap_angle(pose.theta)) - cfg.turn_kd * twist.omega + nt

        bottom = pose.z - sim.part_half_height - sim.surface_z
        off_mouth = abs(pose.x) > sim.hole_half_width
        if bottom > 0.004 and not state.in_contact:
            # Center first, descend once roughly over the mouth: the strategy
            # stays state-sequenced so any replay cadence reproduces it.
            gate = min(max(2.0 - abs(pose.x) / 0.004, 0.0), 1.0)
            vz_target = -cfg.descend_speed * self.speed * gate
            fz = cfg.speed_kff * vz_target + cfg.speed_kd * (vz_target - twist.vz) + nz
        elif state.in_contact and off_mouth and bottom > -0.003:
            # Parked on the top surface: lean lightly and shove toward the
            # mouth hard enough to beat stiction.
            fx = 3.0 * cfg.lateral_kp * (-pose.x) - cfg.lateral_kd * twist.vx + nx
            fz = -1.0 + 0.3 * nz
        elif pose.z > 0.0015:
            # Insertion: steady press, extra rattle while jammed.
            fz = -self.press * (0.55 if state.t <= self._jiggle_until else 1.0) + nz
            if state.t <= self._jiggle_until:
                swing = math.sin(2.0 * math.pi * cfg.jiggle_hz * state.t + self.jiggle_phase)
                fx += self.jiggle_gain * swing
                tau += 0.04 * self.jiggle_gain * math.cos(
                    2.0 * math.pi * cfg.jiggle_hz * state.t + self.jiggle_phase
                )
        else:
            # Final press-in: straight down, damp lateral motion.
            fz = -(self.press * 1.3) + 0.5 * nz
            fx = -2.0 * cfg.lateral_kd * twist.vx + 0.5 * nx

        return Wrench(fx, fz, tau).clamped(sim.wrench_limits)


def record_demo(
    sim_cfg: SimConfig,
    rng: np.random.Generator,
    demo_cfg: DemonstratorConfig | None = None,
    demo_id: str = "demo",
    start: SimState | None = None,
) -> Demonstration | None:
    """One scripted episode; None when the attempt times out."""
    demo_cfg = demo_cfg or DemonstratorConfig()
    policy = FunnelPolicy(sim_cfg, demo_cfg, rng)
    state = start if start is not None else random_start(sim_cfg, rng)
    samples: list[DemoSample] = []
    max_steps = int(demo_cfg.timeout / sim_cfg.dt)
    cfg_hash = config_hash(sim_cfg)
    for _ in range(max_steps):
        w = policy.wrench(state)
        samples.append(DemoSample(state.t, state.pose, state.twist, w))
        state = step(state, w, sim_cfg)
        if goal_distance(state) <= demo_cfg.success_threshold:
            samples.append(
                DemoSample(state.t, state.pose, state.twist, policy.wrench(state))
            )
            return Demonstration(demo_id, cfg_hash, sim_cfg.dt, samples, True, "scripted")
    return None


def _inflated_start(sim_cfg: SimConfig, rng: np.random.Generator,
                    margin: float) -> SimState:
    """Start pose from a box inflated beyond the nominal one, so learned
    behavior covers the evaluation boundary with margin."""
    from .engine import initial_state
    from . import contact
    from .geometry import Pose, Twist
    x0, x1, z0, z1, t0, t1 = sim_cfg.start_box
    cx, cz, ct = 0.5 * (x0 + x1), 0.5 * (z0 + z1), 0.5 * (t0 + t1)
    hx, hz, ht = margin * 0.5 * (x1 - x0), margin * 0.5 * (z1 - z0), margin * 0.5 * (t1 - t0)
    for _ in range(100):
        pose = Pose(
            cx + hx * (2.0 * rng.random() - 1.0),
            cz + hz * (2.0 * rng.random() - 1.0),
            ct + ht * (2.0 * rng.random() - 1.0),
        )
        if not contact.penetrating(pose, sim_cfg):
            return initial_state(pose, Twist(0.0, 0.0, 0.0), sim_cfg)
    raise ConfigError("inflated start box overlaps the fixture geometry")


def generate_dataset(
    sim_cfg: SimConfig,
    count: int,
    seed: int,
    demo_cfg: DemonstratorConfig | None = None,
    start_margin: float = 1.2,
) -> list[Demonstration]:
    """`count` successful demonstrations; aborts if the policy is too weak."""
    demo_cfg = demo_cfg or DemonstratorConfig()
    rng = np.random.default_rng(seed)
    demos: list[Demonstration] = []
    attempts = 0
    while len(demos) < count:
        attempts += 1
        start = _inflated_start(sim_cfg, rng, start_margin) if start_margin != 1.0 else None
        demo = record_demo(sim_cfg, rng, demo_cfg, demo_id=f"scripted_{len(demos):05d}",
                           start=start)
        if demo is not None:
            demos.append(demo)
        if attempts >= 20 and len(demos) / attempts < 0.5:
            raise ConfigError(
                f"scripted demonstrator succeeded only {len(demos)}/{attempts}; "
                "dataset generation infeasible under this configuration"
            )
    return demos
