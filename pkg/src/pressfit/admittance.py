"""Forward-dynamics admittance control step.

The wrench error, scaled by a diagonal gain, is mapped through the Jacobian
transpose to joint torques; the virtual arm's response is integrated with a
forward Euler step (position first, then velocity) and a per-cycle joint
velocity damping factor that suppresses oscillations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .arm import ArmModel, ArmState, inertia_matrix, jacobian, solve_inertia
from .errors import ConfigError, SimulationFault
from .geometry import Wrench


@dataclass
class ControllerConfig:
    # Diagonal wrench-error gain (fx, fz, tau axes).
    kp: tuple[float, float, float] = (0.21, 1.12, 1.7)
    sim_dt: float = 0.002           # virtual-arm integration window
    model_rate: float = 5.0         # strategy sampling rate, Hz
    control_rate: float = 500.0     # admittance rate, Hz
    feature_rate: float = 100.0     # state-feedback cadence into the encoder
    joint_damping: float = 0.9      # per-cycle velocity retention factor
    qdd_limit: float = 400.0        # per-joint |acceleration| clamp
    post_scale: float = 1.0         # amplitude scaling of sampled wrenches

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if any(g <= 0.0 for g in self.kp):
            raise ConfigError("kp entries must be positive")
        if self.sim_dt <= 0.0 or self.model_rate <= 0.0 or self.control_rate <= 0.0:
            raise ConfigError("rates and sim_dt must be positive")
        ratio = self.control_rate / self.model_rate
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError("control_rate must be an integer multiple of model_rate")
        fratio = self.control_rate / self.feature_rate
        if abs(fratio - round(fratio)) > 1e-9 or round(fratio) < 1:
            raise ConfigError("control_rate must be an integer multiple of feature_rate")
        mratio = self.feature_rate / self.model_rate
        if abs(mratio - round(mratio)) > 1e-9 or round(mratio) < 1:
            raise ConfigError("feature_rate must be an integer multiple of model_rate")
        if not (0.0 < self.joint_damping <= 1.0):
            raise ConfigError("joint_damping must be in (0, 1]")
        if not (0.0 <= self.post_scale <= 1.0):
            raise ConfigError("post_scale must be in [0, 1]")

    @property
    def steps_per_tick(self) -> int:
        return int(round(self.control_rate / self.model_rate))

    @property
    def steps_per_feature(self) -> int:
        return int(round(self.control_rate / self.feature_rate))


@dataclass
class ControlDiagnostics:
    regularized_solves: int = 0
    control_steps: int = 0


def control_step(
    cfg: ControllerConfig,
    model: ArmModel,
    state: ArmState,
    f_ref: Wrench,
    f_meas: Wrench,
    diag: ControlDiagnostics | None = None,
) -> ArmState:
    """One admittance cycle; returns the commanded joint state."""
    if not (f_ref.is_finite() and f_meas.is_finite()):
        raise SimulationFault("non-finite wrench into control step")
    ex = cfg.kp[0] * (f_ref.fx - f_meas.fx)
    ez = cfg.kp[1] * (f_ref.fz - f_meas.fz)
    et = cfg.kp[2] * (f_ref.tau - f_meas.tau)

    jac = jacobian(model, state.q)
    tau = (
        jac[0][0] * ex + jac[1][0] * ez + jac[2][0] * et,
        jac[0][1] * ex + jac[1][1] * ez + jac[2][1] * et,
        jac[0][2] * ex + jac[1][2] * ez + jac[2][2] * et,
    )
    h = inertia_matrix(model, state.q)
    qdd, regularized = solve_inertia(h, tau)
    lim = cfg.qdd_limit
    qdd = tuple(min(max(a, -lim), lim) for a in qdd)
    if diag is not None:
        diag.control_steps += 1
        if regularized:
            diag.regularized_solves += 1

    dt = cfg.sim_dt
    damp = cfg.joint_damping
    q = tuple(state.q[i] + state.qd[i] * dt for i in range(3))
    qd = tuple((state.qd[i] + qdd[i] * dt) * damp for i in range(3))
    return ArmState(q, qd)


def post_scale(wrench: Wrench, factor: float) -> Wrench:
    """Element-wise amplitude reduction applied before the controller."""
    if not 0.0 <= factor <= 1.0:
        raise ConfigError("post-scale factor must be in [0, 1]")
    return wrench.scaled(factor)
