"""Model input features and z-score normalization.

One feature vector per recorded step: goal-relative position, orientation as
a (sin, cos) pair to avoid the wrap discontinuity, velocities, and the
commanded wrench. Files keep raw theta; only the feature view expands it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .geometry import Pose, Twist, Wrench
from .recording import Demonstration

WRENCH_DIM = 3
FEATURE_DIM = 4 + 3 + WRENCH_DIM  # (x, z, sin, cos) + twist + wrench
WRENCH_START = 7
FEATURE_NAMES = ("x", "z", "sin_th", "cos_th", "vx", "vz", "omega", "fx", "fz", "tau")


def shifted_pose(pose: Pose, goal_shift: tuple[float, float, float]) -> Pose:
    """Express a true-frame pose in the (possibly mis-calibrated) goal frame."""
    sx, sz, sth = goal_shift
    if sx == 0.0 and sz == 0.0 and sth == 0.0:
        return pose
    c, s = math.cos(-sth), math.sin(-sth)
    dx, dz = pose.x - sx, pose.z - sz
    return Pose(c * dx - s * dz, s * dx + c * dz, pose.theta - sth)


def feature_vector(
    pose: Pose,
    twist: Twist,
    wrench: Wrench,
    goal_shift: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> np.ndarray:
    p = shifted_pose(pose, goal_shift)
    return np.array(
        [
            p.x,
            p.z,
            math.sin(p.theta),
            math.cos(p.theta),
            twist.vx,
            twist.vz,
            twist.omega,
            wrench.fx,
            wrench.fz,
            wrench.tau,
        ]
    )


def demo_features(
    demo: Demonstration, goal_shift: tuple[float, float, float] = (0.0, 0.0, 0.0)
) -> np.ndarray:
    """(len, FEATURE_DIM) array of raw features for every sample."""
    out = np.empty((len(demo), FEATURE_DIM))
    for i, s in enumerate(demo.samples):
        out[i] = feature_vector(s.pose, s.twist, s.wrench, goal_shift)
    return out


@dataclass
class NormStats:
    mean: np.ndarray  # (FEATURE_DIM,)
    std: np.ndarray   # (FEATURE_DIM,), zero-variance features forced to 1

    @property
    def wrench_mean(self) -> np.ndarray:
        return self.mean[WRENCH_START:]

    @property
    def wrench_std(self) -> np.ndarray:
        return self.std[WRENCH_START:]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def invert(self, x: np.ndarray) -> np.ndarray:
        return x * self.std + self.mean

    def apply_wrench(self, y: np.ndarray) -> np.ndarray:
        return (y - self.wrench_mean) / self.wrench_std

    def invert_wrench(self, y: np.ndarray) -> np.ndarray:
        return y * self.wrench_std + self.wrench_mean

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "NormStats":
        return cls(np.asarray(obj["mean"], dtype=float), np.asarray(obj["std"], dtype=float))


def fit_norm_stats(feature_arrays: list[np.ndarray]) -> NormStats:
    """Per-feature z-score statistics over all samples of all demos."""
    if not feature_arrays:
        raise DataError("cannot fit normalization on an empty dataset")
    stacked = np.concatenate(feature_arrays, axis=0)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    std[std < 1e-12] = 1.0
    return NormStats(mean, std)
