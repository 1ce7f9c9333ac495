"""Fixed-step rigid-body stepping of the steered part.

One `step` is one recording sample: semi-implicit Euler at cfg.dt with the
applied wrench, the stored contact reaction and velocity-proportional damping.
Stepping is purely functional and bit-deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import contact
from .config import SimConfig
from .errors import ConfigError, SimulationFault
from .geometry import Pose, Twist, Wrench, ZERO_TWIST, ZERO_WRENCH, wrap_angle


@dataclass(frozen=True, slots=True)
class SimState:
    pose: Pose
    twist: Twist
    contact_wrench: Wrench
    t: float
    in_contact: bool


def initial_state(pose: Pose, twist: Twist, cfg: SimConfig, t: float = 0.0) -> SimState:
    fx, fz, tau, n = contact.resolve(pose, twist, cfg)
    return SimState(pose, twist, Wrench(fx, fz, tau), t, n > 0)


def step(state: SimState, applied: Wrench, cfg: SimConfig) -> SimState:
    """Advance by cfg.dt under `applied` plus contact and damping forces."""
    if not (state.pose.is_finite() and state.twist.is_finite()):
        raise SimulationFault(f"non-finite state at t={state.t}")
    if not applied.is_finite():
        raise SimulationFault(f"non-finite applied wrench at t={state.t}")

    p, v, cw = state.pose, state.twist, state.contact_wrench
    ax = (applied.fx + cw.fx - cfg.lin_damping * v.vx) / cfg.mass
    az = (applied.fz + cw.fz - cfg.lin_damping * v.vz) / cfg.mass
    aw = (applied.tau + cw.tau - cfg.rot_damping * v.omega) / cfg.rot_inertia

    dt = cfg.dt
    vx = v.vx + ax * dt
    vz = v.vz + az * dt
    om = v.omega + aw * dt
    new_pose = Pose(p.x + vx * dt, p.z + vz * dt, wrap_angle(p.theta + om * dt))
    new_twist = Twist(vx, vz, om)

    fx, fz, tau, n = contact.resolve(new_pose, new_twist, cfg)
    return SimState(new_pose, new_twist, Wrench(fx, fz, tau), state.t + dt, n > 0)


def goal_distance(state: SimState) -> float:
    """Positional distance to the goal pose (orientation excluded)."""
    return math.hypot(state.pose.x, state.pose.z)


def random_start(cfg: SimConfig, rng: np.random.Generator) -> SimState:
    """Contact-free start pose sampled uniformly from the configured box."""
    x0, x1, z0, z1, t0, t1 = cfg.start_box
    pose = Pose(
        x0 + (x1 - x0) * rng.random(),
        z0 + (z1 - z0) * rng.random(),
        t0 + (t1 - t0) * rng.random(),
    )
    if contact.penetrating(pose, cfg):
        raise ConfigError(
            f"start box overlaps the fixture geometry (sampled pose {pose})"
        )
    return SimState(pose, ZERO_TWIST, ZERO_WRENCH, 0.0, False)
