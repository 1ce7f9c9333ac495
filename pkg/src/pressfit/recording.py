"""Demonstration files and datasets.

One file per demonstration: a JSON header line followed by one JSON sample
per line at full float precision, so write -> read round-trips bit-exactly.
A dataset is a directory of such files plus a manifest and the simulator
config that produced them.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from . import config as simconfig
from .config import SimConfig
from .errors import DataError, DemoFormatError
from .geometry import Pose, Twist, Wrench

FORMAT_VERSION = 1
_SPACING_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class DemoSample:
    t: float
    pose: Pose
    twist: Twist
    wrench: Wrench  # commanded wrench at this step


@dataclass
class Demonstration:
    id: str
    sim_config_hash: str
    dt: float
    samples: list[DemoSample]
    success: bool
    source: str = "scripted"  # or "human"

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return (len(self.samples) - 1) * self.dt if self.samples else 0.0


def _require_finite_triple(raw, what: str) -> tuple[float, float, float]:
    if not isinstance(raw, list) or len(raw) != 3:
        raise DemoFormatError(f"{what} must be a 3-element array, got {raw!r}")
    vals = []
    for v in raw:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise DemoFormatError(f"non-finite or non-numeric value in {what}: {v!r}")
        vals.append(float(v))
    return vals[0], vals[1], vals[2]


def sample_to_line(s: DemoSample) -> str:
    return json.dumps(
        {
            "t": s.t,
            "pose": [s.pose.x, s.pose.z, s.pose.theta],
            "twist": [s.twist.vx, s.twist.vz, s.twist.omega],
            "wrench": [s.wrench.fx, s.wrench.fz, s.wrench.tau],
        }
    )


def write_demo(demo: Demonstration, path) -> None:
    header = {
        "version": FORMAT_VERSION,
        "id": demo.id,
        "dt": demo.dt,
        "sim_config_hash": demo.sim_config_hash,
        "source": demo.source,
        "success": demo.success,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for s in demo.samples:
            fh.write(sample_to_line(s) + "\n")


def read_demo(path) -> Demonstration:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise DemoFormatError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DemoFormatError(f"{path}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DemoFormatError(f"{path}: bad header: {exc}") from exc
    if not isinstance(header, dict):
        raise DemoFormatError(f"{path}: header is not an object")
    if header.get("version") != FORMAT_VERSION:
        raise DemoFormatError(
            f"{path}: unsupported version {header.get('version')!r}"
        )
    try:
        demo_id = str(header["id"])
        dt = float(header["dt"])
        cfg_hash = str(header["sim_config_hash"])
        source = str(header["source"])
        success = bool(header["success"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DemoFormatError(f"{path}: bad header field: {exc}") from exc
    if not math.isfinite(dt) or dt <= 0.0:
        raise DemoFormatError(f"{path}: bad dt {dt!r}")
    if source not in ("human", "scripted"):
        raise DemoFormatError(f"{path}: bad source {source!r}")

    samples: list[DemoSample] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            t = obj["t"]
            if not isinstance(t, (int, float)) or isinstance(t, bool) or not math.isfinite(t):
                raise DemoFormatError(f"bad t value {t!r}")
            pose = Pose(*_require_finite_triple(obj["pose"], "pose"))
            twist = Twist(*_require_finite_triple(obj["twist"], "twist"))
            wrench = Wrench(*_require_finite_triple(obj["wrench"], "wrench"))
        except DemoFormatError as exc:
            raise DemoFormatError(f"{path}:{lineno}: {exc}") from exc
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DemoFormatError(f"{path}:{lineno}: malformed sample: {exc}") from exc
        samples.append(DemoSample(float(t), pose, twist, wrench))

    for i in range(1, len(samples)):
        if abs((samples[i].t - samples[i - 1].t) - dt) > _SPACING_TOL:
            raise DemoFormatError(
                f"{path}: sample spacing {samples[i].t - samples[i-1].t} != dt at index {i}"
            )
    return Demonstration(demo_id, cfg_hash, dt, samples, success, source)


@dataclass
class Dataset:
    demos: list[Demonstration]
    sim_config: SimConfig | None = None
    sim_config_hash: str = ""
    paths: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.demos)

    def durations(self) -> list[float]:
        return [d.duration for d in self.demos]


MANIFEST_NAME = "manifest.json"
CONFIG_NAME = "sim_config.txt"


def save_dataset(demos: list[Demonstration], cfg: SimConfig, directory) -> Dataset:
    os.makedirs(directory, exist_ok=True)
    simconfig.save(cfg, os.path.join(directory, CONFIG_NAME))
    names = []
    for i, demo in enumerate(demos):
        name = f"demo_{i:05d}.txt"
        write_demo(demo, os.path.join(directory, name))
        names.append(name)
    manifest = {
        "version": FORMAT_VERSION,
        "sim_config_hash": simconfig.config_hash(cfg),
        "sim_config_file": CONFIG_NAME,
        "demos": names,
    }
    with open(os.path.join(directory, MANIFEST_NAME), "w") as fh:
        json.dump(manifest, fh, indent=1)
    return Dataset(list(demos), cfg, simconfig.config_hash(cfg),
                   [os.path.join(directory, n) for n in names])


def load_dataset(directory) -> Dataset:
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise DataError(f"no dataset manifest at {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: malformed manifest: {exc}") from exc
    if manifest.get("version") != FORMAT_VERSION:
        raise DataError(f"{manifest_path}: unsupported version")
    cfg = None
    cfg_file = manifest.get("sim_config_file")
    if cfg_file:
        cfg = simconfig.load(os.path.join(directory, cfg_file))
    demos = []
    paths = []
    for name in manifest.get("demos", []):
        path = os.path.join(directory, name)
        demos.append(read_demo(path))
        paths.append(path)
    expected = manifest.get("sim_config_hash", "")
    for demo in demos:
        if expected and demo.sim_config_hash != expected:
            raise DataError(
                f"{demo.id}: sim config hash {demo.sim_config_hash} "
                f"does not match manifest {expected}"
            )
    return Dataset(demos, cfg, expected, paths)
