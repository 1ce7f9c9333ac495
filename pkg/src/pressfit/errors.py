"""Exception hierarchy. Each failure class maps to one CLI exit code."""


class PressfitError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(PressfitError):
    """Invalid or inconsistent configuration values."""

    exit_code = 2


class DataError(PressfitError):
    """Problems with demonstration files, datasets or manifests."""

    exit_code = 3


class DemoFormatError(DataError):
    """Demonstration file is malformed or truncated."""


class CheckpointError(PressfitError):
    """Base class for checkpoint load/save failures."""

    exit_code = 4


class CheckpointFormatError(CheckpointError):
    """Checkpoint file is not parseable or is truncated."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format version is unsupported."""


class CheckpointDimensionError(CheckpointError):
    """Stored tensors disagree with the declared dimensions."""


class TrainingDiverged(PressfitError):
    """Loss became non-finite; carries a snapshot of the offending batch."""

    exit_code = 5

    def __init__(self, message: str, step: int = -1, batch_info: dict | None = None):
        super().__init__(message)
        self.step = step
        self.batch_info = batch_info or {}


class SimulationFault(PressfitError):
    """Non-finite state or input reached the simulator."""

    exit_code = 6


class ProtocolError(PressfitError):
    """Malformed or out-of-contract teleoperation wire message."""

    exit_code = 7
