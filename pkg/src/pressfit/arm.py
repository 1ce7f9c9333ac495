"""Planar 3-revolute manipulator: kinematics, Jacobian, joint-space inertia.

The arm lives in the same x/z plane as the task, base mounted above the
fixture. Its tool frame carries the part: part orientation is the chain
angle plus a fixed 90-degree tool offset so a downward-pointing last link
holds the part upright. Links are uniform rods for the inertia model. All
math is scalar for tight control loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .geometry import Pose, Twist, wrap_angle

TOOL_OFFSET = math.pi / 2  # part theta = chain angle + offset


@dataclass(frozen=True)
class ArmModel:
    lengths: tuple[float, float, float] = (0.25, 0.20, 0.15)
    masses: tuple[float, float, float] = (2.0, 1.5, 1.0)
    base: tuple[float, float] = (0.05, 0.40)

    def __post_init__(self):
        if any(v <= 0.0 for v in self.lengths + self.masses):
            raise ConfigError("link lengths and masses must be positive")


@dataclass(frozen=True)
class ArmState:
    q: tuple[float, float, float]
    qd: tuple[float, float, float]


def _angles(q: tuple[float, float, float]) -> tuple[float, float, float]:
    p1 = q[0]
    p2 = p1 + q[1]
    p3 = p2 + q[2]
    return p1, p2, p3


def joint_positions(model: ArmModel, q) -> list[tuple[float, float]]:
    """Base, elbow, wrist, end-effector positions."""
    p1, p2, p3 = _angles(q)
    l1, l2, l3 = model.lengths
    bx, bz = model.base
    j1 = (bx + l1 * math.cos(p1), bz + l1 * math.sin(p1))
    j2 = (j1[0] + l2 * math.cos(p2), j1[1] + l2 * math.sin(p2))
    ee = (j2[0] + l3 * math.cos(p3), j2[1] + l3 * math.sin(p3))
    return [(bx, bz), j1, j2, ee]


def forward_kinematics(model: ArmModel, state: ArmState) -> tuple[Pose, Twist]:
    """End-effector pose (goal frame) and twist from the joint state."""
    pts = joint_positions(model, state.q)
    ee = pts[3]
    _, _, p3 = _angles(state.q)
    pose = Pose(ee[0], ee[1], wrap_angle(p3 + TOOL_OFFSET))
    jac = jacobian(model, state.q)
    qd = state.qd
    vx = jac[0][0] * qd[0] + jac[0][1] * qd[1] + jac[0][2] * qd[2]
    vz = jac[1][0] * qd[0] + jac[1][1] * qd[1] + jac[1][2] * qd[2]
    om = qd[0] + qd[1] + qd[2]
    return pose, Twist(vx, vz, om)


def jacobian(model: ArmModel, q) -> list[list[float]]:
    """3x3 end-effector Jacobian: rows (vx, vz, omega), columns per joint."""
    pts = joint_positions(model, q)
    ee = pts[3]
    cols = []
    for j in range(3):
        jx, jz = pts[j]
        cols.append((-(ee[1] - jz), ee[0] - jx))
    return [
        [cols[0][0], cols[1][0], cols[2][0]],
        [cols[0][1], cols[1][1], cols[2][1]],
        [1.0, 1.0, 1.0],
    ]


def inertia_matrix(model: ArmModel, q) -> list[list[float]]:
    """Joint-space inertia from uniform-rod links (symmetric positive definite)."""
    p = _angles(q)
    pts = joint_positions(model, q)
    l = model.lengths
    ms = model.masses
    h = [[0.0] * 3 for _ in range(3)]
    for i in range(3):
        # COM of link i sits halfway along it.
        jx, jz = pts[i]
        cx = jx + 0.5 * l[i] * math.cos(p[i])
        cz = jz + 0.5 * l[i] * math.sin(p[i])
        icom = ms[i] * l[i] * l[i] / 12.0
        # COM Jacobian columns for joints 0..i.
        cols = []
        for j in range(i + 1):
            ox, oz = pts[j]
            cols.append((-(cz - oz), cx - ox))
        for a in range(i + 1):
            for b in range(i + 1):
                h[a][b] += ms[i] * (cols[a][0] * cols[b][0] + cols[a][1] * cols[b][1])
                h[a][b] += icom
    return h


def solve_inertia(
    h: list[list[float]], rhs: tuple[float, float, float], reg: float = 1e-6
) -> tuple[tuple[float, float, float], bool]:
    """Solve H x = rhs via Cramer; regularize H + reg*I when near-singular.

    Returns (solution, regularized_flag).
    """
    def det3(m):
        return (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )

    scale = max(abs(h[i][j]) for i in range(3) for j in range(3))
    d = det3(h)
    regularized = False
    if abs(d) < 1e-9 * max(scale, 1e-12) ** 3:
        h = [[h[i][j] + (reg if i == j else 0.0) for j in range(3)] for i in range(3)]
        d = det3(h)
        regularized = True
    out = []
    for col in range(3):
        m = [row[:] for row in h]
        for row in range(3):
            m[row][col] = rhs[row]
        out.append(det3(m) / d)
    return (out[0], out[1], out[2]), regularized


def inverse_kinematics(
    model: ArmModel, pose: Pose, elbow: float = 1.0
) -> tuple[float, float, float]:
    """Closed-form joint angles placing the tool at `pose`.

    `elbow` selects the branch (+1 / -1). Raises when out of reach.
    """
    l1, l2, l3 = model.lengths
    p3 = pose.theta - TOOL_OFFSET
    wx = pose.x - l3 * math.cos(p3) - model.base[0]
    wz = pose.z - l3 * math.sin(p3) - model.base[1]
    r2 = wx * wx + wz * wz
    cos_q2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if not -1.0 <= cos_q2 <= 1.0:
        raise ConfigError(
            f"pose {pose} out of reach (|cos q2| = {abs(cos_q2):.3f} > 1)"
        )
    q2 = math.copysign(math.acos(cos_q2), elbow)
    q1 = math.atan2(wz, wx) - math.atan2(l2 * math.sin(q2), l1 + l2 * math.cos(q2))
    q3 = p3 - q1 - q2
    return (q1, q2, wrap_angle(q3))
