"""Probabilistic force strategies for low-clearance planar assembly."""

__version__ = "0.1.0"

from .config import SimConfig
from .geometry import Pose, Twist, Wrench

__all__ = ["SimConfig", "Pose", "Twist", "Wrench", "__version__"]
