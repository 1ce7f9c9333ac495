"""Simulator configuration: geometry, dynamics and contact parameters.

Serialized as a human-readable ``key = value`` file whose content hash is
stamped into demonstration headers so datasets stay tied to the physics that
produced them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError


@dataclass(frozen=True)
class SimConfig:
    # Part and fixture geometry (meters). The hole is a centered slot in a
    # flat surface; its top edges carry 45-degree chamfers.
    part_half_width: float = 0.005
    part_half_height: float = 0.015
    hole_half_width: float = 0.0051  # clearance = 2*(hole - part) = 0.2 mm
    hole_depth: float = 0.015
    chamfer: float = 0.001

    # Rigid-body parameters. Rotational inertia is deliberately above the
    # thin-rectangle value so penalty contact stays inside the stable region
    # of the fixed-step integrator.
    mass: float = 1.0
    rot_inertia: float = 2.0e-3
    lin_damping: float = 80.0
    rot_damping: float = 0.16

    # Penalty contact model.
    contact_stiffness: float = 1.0e4
    contact_damping: float = 30.0
    friction_mu: float = 0.4
    stiction_mu: float = 0.6
    stiction_vel_eps: float = 1.0e-3

    dt: float = 0.01  # 100 Hz stepping == recording rate

    # Per-axis command saturation (|fx|, |fz|, |tau|).
    wrench_limits: tuple[float, float, float] = (25.0, 25.0, 0.5)

    # Start-pose sampling box: (x_min, x_max, z_min, z_max, th_min, th_max).
    start_box: tuple[float, float, float, float, float, float] = (
        -0.015,
        0.015,
        0.020,
        0.040,
        -0.3,
        0.3,
    )

    # Offset of the estimated goal frame from the true one (calibration
    # error emulation); applied when building model features only.
    goal_shift: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.validate()

    @property
    def clearance(self) -> float:
        """Total width clearance between hole and part."""
        return 2.0 * (self.hole_half_width - self.part_half_width)

    @property
    def surface_z(self) -> float:
        """Height of the fixture's top surface in the goal frame."""
        return self.hole_depth - self.part_half_height

    @property
    def hole_bottom_z(self) -> float:
        return -self.part_half_height

    def validate(self) -> None:
        if self.clearance <= 0.0:
            raise ConfigError(f"clearance must be positive, got {self.clearance}")
        for name in (
            "part_half_width",
            "part_half_height",
            "hole_depth",
            "mass",
            "rot_inertia",
            "lin_damping",
            "rot_damping",
            "contact_stiffness",
            "contact_damping",
            "dt",
        ):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be > 0")
        if self.chamfer < 0.0:
            raise ConfigError("chamfer must be >= 0")
        if self.stiction_mu < self.friction_mu:
            raise ConfigError("stiction_mu must be >= friction_mu")
        if self.friction_mu < 0.0:
            raise ConfigError("friction_mu must be >= 0")
        if self.stiction_vel_eps <= 0.0:
            raise ConfigError("stiction_vel_eps must be > 0")
        if any(v <= 0.0 for v in self.wrench_limits):
            raise ConfigError("wrench_limits must be positive")
        x0, x1, z0, z1, t0, t1 = self.start_box
        if x0 > x1 or z0 > z1 or t0 > t1:
            raise ConfigError("start_box bounds out of order")


_TUPLE_FIELDS = {"wrench_limits", "start_box", "goal_shift"}


def to_text(cfg: SimConfig) -> str:
    """Render the config as canonical ``key = value`` lines (sorted keys)."""
    lines = ["# pressfit sim config v1"]
    for f in sorted(fields(cfg), key=lambda f: f.name):
        value = getattr(cfg, f.name)
        if f.name in _TUPLE_FIELDS:
            rendered = ", ".join(repr(float(v)) for v in value)
        else:
            rendered = repr(float(value))
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> SimConfig:
    values: dict = {}
    known = {f.name for f in fields(SimConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, rendered = line.partition("=")
        key = key.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _TUPLE_FIELDS:
                values[key] = tuple(float(v) for v in rendered.split(","))
            else:
                values[key] = float(rendered)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    try:
        return SimConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def config_hash(cfg: SimConfig) -> str:
    """Short content hash stamped into demonstration headers."""
    return hashlib.sha256(to_text(cfg).encode()).hexdigest()[:12]


def save(cfg: SimConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_text(cfg))


def load(path) -> SimConfig:
    with open(path) as fh:
        return from_text(fh.read())


def with_overrides(cfg: SimConfig, **kwargs) -> SimConfig:
    return replace(cfg, **kwargs)
