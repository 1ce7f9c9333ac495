"""Planar rigid-body primitives shared by the simulator, controller and model.

The working plane is x (lateral) / z (vertical insertion axis), with theta the
counterclockwise rotation in that plane. All values are SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    theta = math.fmod(theta, TWO_PI)
    if theta > math.pi:
        theta -= TWO_PI
    elif theta <= -math.pi:
        theta += TWO_PI
    return theta


@dataclass(frozen=True, slots=True)
class Pose:
    """Part pose in the goal frame (x lateral, z along insertion, theta CCW)."""

    x: float
    z: float
    theta: float

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.z) and math.isfinite(self.theta)


@dataclass(frozen=True, slots=True)
class Twist:
    vx: float
    vz: float
    omega: float

    def is_finite(self) -> bool:
        return math.isfinite(self.vx) and math.isfinite(self.vz) and math.isfinite(self.omega)


@dataclass(frozen=True, slots=True)
class Wrench:
    """Force-torque vector: the commanded motor signal and the model's label."""

    fx: float
    fz: float
    tau: float

    def is_finite(self) -> bool:
        return math.isfinite(self.fx) and math.isfinite(self.fz) and math.isfinite(self.tau)

    def scaled(self, factor: float) -> "Wrench":
        return Wrench(self.fx * factor, self.fz * factor, self.tau * factor)

    def clamped(self, limits: tuple[float, float, float]) -> "Wrench":
        return Wrench(
            min(max(self.fx, -limits[0]), limits[0]),
            min(max(self.fz, -limits[1]), limits[1]),
            min(max(self.tau, -limits[2]), limits[2]),
        )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.fx, self.fz, self.tau)


ZERO_WRENCH = Wrench(0.0, 0.0, 0.0)
ZERO_TWIST = Twist(0.0, 0.0, 0.0)
