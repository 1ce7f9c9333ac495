"""Penalty contact between the rectangular part and the slotted fixture.

The fixture is solid below its top surface except for a centered slot with
45-degree chamfered lips. Contact is resolved point-wise: the four part
corners are tested against the fixture solid, and the two convex chamfer lips
are tested against the part rectangle (face-on-lip contact during tilted
insertion). Normal forces follow a linear penalty with damping; tangential
forces follow Coulomb friction with a stiction ramp below a velocity
threshold. Interpenetration on the order of force/stiffness is expected and
tolerated.

Inputs are mirror-canonicalized so that negating (x, theta, vx, omega)
negates (fx, tau) bit-exactly.
"""

from __future__ import annotations

import math
from functools import lru_cache

from .config import SimConfig
from .geometry import Pose, Twist, Wrench, ZERO_TWIST

_FAR = 1.0  # lateral extent of the modeled surface, m


def _step5(u: float) -> float:
    """Quintic smoothstep on [0, 1] (C2 at both ends)."""
    u3 = u * u * u
    return u3 * (10.0 + u * (6.0 * u - 15.0))


def _friction_mu(cfg: SimConfig, v_t: float) -> float:
    """Signed friction coefficient: stiction ramp, blend, then dynamic.

    Odd in v_t; |v_t| < eps ramps linearly through zero (regularized stick),
    the stiction-to-dynamic handover is smoothed over (eps, 3*eps).
    """
    eps = cfg.stiction_vel_eps
    s = v_t / eps
    a = abs(s)
    if a < 1.0:
        return cfg.stiction_mu * s
    sign = 1.0 if s > 0.0 else -1.0
    if a < 3.0:
        blend = _step5((a - 1.0) * 0.5)
        return sign * (cfg.stiction_mu + (cfg.friction_mu - cfg.stiction_mu) * blend)
    return sign * cfg.friction_mu


@lru_cache(maxsize=32)
def _fixture_segments(cfg: SimConfig) -> tuple[tuple[float, float, float, float], ...]:
    """Boundary segments (x0, z0, x1, z1) of the fixture solid."""
    hw = cfg.hole_half_width
    ch = cfg.chamfer
    zs = cfg.surface_z
    zb = cfg.hole_bottom_z
    segs = [
        (hw + ch, zs, _FAR, zs),          # right surface
        (-_FAR, zs, -(hw + ch), zs),      # left surface
        (hw, zb, hw, zs - ch),            # right wall
        (-hw, zb, -hw, zs - ch),          # left wall
        (-hw, zb, hw, zb),                # hole bottom
    ]
    if ch > 0.0:
        segs.append((hw, zs - ch, hw + ch, zs))    # right chamfer
        segs.append((-hw, zs - ch, -(hw + ch), zs))  # left chamfer
    return tuple(segs)


def _point_in_solid(px: float, pz: float, cfg: SimConfig) -> bool:
    if pz >= cfg.surface_z:
        return False
    ax = abs(px)
    hw = cfg.hole_half_width
    ch = cfg.chamfer
    if ax < hw and pz > cfg.hole_bottom_z:
        return False
    if ch > 0.0 and hw <= ax < hw + ch and pz > cfg.surface_z - (hw + ch - ax):
        return False
    return True


def _nearest_boundary(px: float, pz: float, cfg: SimConfig) -> tuple[float, float, float]:
    """For a point inside the solid: (depth, nx, nz) of the closest exit.

    The outward normal points from the nearest boundary point away from the
    solid; vertex regions fall out of the point-to-segment minimization.
    """
    best_d2 = math.inf
    best = (0.0, 0.0, 1.0)
    for x0, z0, x1, z1 in _fixture_segments(cfg):
        # Axis-aligned segments get exact projections so normals carry no
        # spurious lateral component (mirror exactness relies on this).
        if z0 == z1:
            qx = min(max(px, min(x0, x1)), max(x0, x1))
            qz = z0
        elif x0 == x1:
            qx = x0
            qz = min(max(pz, min(z0, z1)), max(z0, z1))
        else:
            dx = x1 - x0
            dz = z1 - z0
            t = ((px - x0) * dx + (pz - z0) * dz) / (dx * dx + dz * dz)
            t = min(max(t, 0.0), 1.0)
            qx = x0 + t * dx
            qz = z0 + t * dz
        ex = qx - px
        ez = qz - pz
        d2 = ex * ex + ez * ez
        if d2 < best_d2:
            best_d2 = d2
            d = math.sqrt(d2)
            if d > 0.0:
                best = (d, ex / d, ez / d)
            else:
                best = (0.0, 0.0, 1.0)
    return best


def part_corners(pose: Pose, cfg: SimConfig) -> list[tuple[float, float]]:
    """World positions of the part's corners (fixed traversal order)."""
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    w = cfg.part_half_width
    h = cfg.part_half_height
    out = []
    for lx, lz in ((-w, -h), (w, -h), (w, h), (-w, h)):
        out.append((pose.x + c * lx - s * lz, pose.z + s * lx + c * lz))
    return out


def _lip_points(cfg: SimConfig) -> tuple[tuple[float, float], tuple[float, float]]:
    lx = cfg.hole_half_width + cfg.chamfer
    zs = cfg.surface_z
    return ((-lx, zs), (lx, zs))


def penetrating(pose: Pose, cfg: SimConfig) -> bool:
    """Geometric overlap test: any part corner in the solid or lip in the part."""
    for px, pz in part_corners(pose, cfg):
        if _point_in_solid(px, pz, cfg):
            return True
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    w = cfg.part_half_width
    h = cfg.part_half_height
    for lx, lz in _lip_points(cfg):
        rx = lx - pose.x
        rz = lz - pose.z
        px = c * rx + s * rz
        pz = -s * rx + c * rz
        if abs(px) < w and abs(pz) < h:
            return True
    return False


def _friction_force(cfg: SimConfig, fn: float, vt: float) -> float:
    """Tangential force opposing slide, capped so one fixed step cannot
    reverse the sliding direction (prevents chatter limit cycles)."""
    ft = -_friction_mu(cfg, vt) * fn
    stop = 0.5 * cfg.mass * abs(vt) / cfg.dt
    if ft > stop:
        return stop
    if ft < -stop:
        return -stop
    return ft


def _resolve_canonical(pose: Pose, twist: Twist, cfg: SimConfig) -> tuple[float, float, float, int]:
    k = cfg.contact_stiffness
    cd = cfg.contact_damping
    fxs: list[float] = []
    fzs: list[float] = []
    taus: list[float] = []
    n_contacts = 0

    cth = math.cos(pose.theta)
    sth = math.sin(pose.theta)
    w = cfg.part_half_width
    h = cfg.part_half_height

    # Part corners vs fixture solid.
    for cx, cz in part_corners(pose, cfg):
        if not _point_in_solid(cx, cz, cfg):
            continue
        depth, nx, nz = _nearest_boundary(cx, cz, cfg)
        rx = cx - pose.x
        rz = cz - pose.z
        vpx = twist.vx - twist.omega * rz
        vpz = twist.vz + twist.omega * rx
        # Penetration rate: positive while still approaching.
        ddot = -(vpx * nx + vpz * nz)
        fn = k * depth + cd * ddot
        if fn < 0.0:
            fn = 0.0
        tx = -nz
        tz = nx
        vt = vpx * tx + vpz * tz
        ft = _friction_force(cfg, fn, vt)
        fx = fn * nx + ft * tx
        fz = fn * nz + ft * tz
        fxs.append(fx)
        fzs.append(fz)
        taus.append(rx * fz - rz * fx)
        n_contacts += 1

    # Fixture lips vs part faces (catches side-face contact on the hole mouth).
    for lx, lz in _lip_points(cfg):
        rx = lx - pose.x
        rz = lz - pose.z
        px = cth * rx + sth * rz
        pz = -sth * rx + cth * rz
        if not (abs(px) < w and abs(pz) < h):
            continue
        # Nearest part face (part-frame outward normal).
        exits = (
            (w - px, 1.0, 0.0),
            (w + px, -1.0, 0.0),
            (h - pz, 0.0, 1.0),
            (h + pz, 0.0, -1.0),
        )
        depth, nlx, nlz = min(exits, key=lambda e: e[0])
        nx = cth * nlx - sth * nlz
        nz = sth * nlx + cth * nlz
        vpx = twist.vx - twist.omega * rz
        vpz = twist.vz + twist.omega * rx
        ddot = vpx * nx + vpz * nz
        fn = k * depth + cd * ddot
        if fn < 0.0:
            fn = 0.0
        # Reaction pushes the part away from the fixture side.
        tx = -nz
        tz = nx
        vt = vpx * tx + vpz * tz
        ft = _friction_force(cfg, fn, vt)
        fx = -fn * nx + ft * tx
        fz = -fn * nz + ft * tz
        fxs.append(fx)
        fzs.append(fz)
        taus.append(rx * fz - rz * fx)
        n_contacts += 1

    if n_contacts == 0:
        return 0.0, 0.0, 0.0, 0
    return math.fsum(fxs), math.fsum(fzs), math.fsum(taus), n_contacts


def _mirror_sign(pose: Pose, twist: Twist) -> float:
    for v in (pose.x, pose.theta, twist.vx, twist.omega):
        if v > 0.0:
            return 1.0
        if v < 0.0:
            return -1.0
    return 1.0


def resolve(pose: Pose, twist: Twist, cfg: SimConfig) -> tuple[float, float, float, int]:
    """Total contact wrench about the part center plus active contact count.

    Mirror-canonicalized: laterally mirrored inputs produce exactly negated
    (fx, tau) and identical fz, so mirrored trajectories stay bit-exact.
    """
    if _mirror_sign(pose, twist) < 0.0:
        m_pose = Pose(-pose.x, pose.z, -pose.theta)
        m_twist = Twist(-twist.vx, twist.vz, -twist.omega)
        fx, fz, tau, n = _resolve_canonical(m_pose, m_twist, cfg)
        return -fx, fz, -tau, n
    return _resolve_canonical(pose, twist, cfg)


def contact_resolve(pose: Pose, twist: Twist | None, cfg: SimConfig) -> Wrench:
    """Reaction wrench on the part; zero when nothing overlaps."""
    fx, fz, tau, _ = resolve(pose, twist if twist is not None else ZERO_TWIST, cfg)
    return Wrench(fx, fz, tau)
