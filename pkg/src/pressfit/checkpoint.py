"""Versioned, self-describing checkpoint files.

JSON text with full-precision floats: dimensions, every weight tensor,
normalization statistics, the hyperparameters and a training-log summary.
Loading validates version, structure and tensor shapes with distinct error
types and round-trips bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import lstm, mdn
from .errors import (
    CheckpointDimensionError,
    CheckpointFormatError,
    CheckpointVersionError,
)
from .features import NormStats
from .network import Dims, LstmMdn, ModelParams

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    dims: Dims
    params: ModelParams
    norm_stats: NormStats
    hyper: dict
    log_summary: dict = field(default_factory=dict)
    seed: int = 0
    format_version: int = FORMAT_VERSION

    def model(self) -> LstmMdn:
        return LstmMdn(self.dims)


def _lstm_shapes(dims: Dims) -> dict[str, tuple[int, ...]]:
    m, c = dims.m, dims.c
    shapes: dict[str, tuple[int, ...]] = {}
    for g in ("f", "i", "o", "c"):
        shapes[f"w_{g}"] = (m, c)
        shapes[f"u_{g}"] = (m, m)
        shapes[f"b_{g}"] = (m,)
    return shapes


def save(ckpt: Checkpoint, path) -> None:
    doc = {
        "format_version": ckpt.format_version,
        "dims": asdict(ckpt.dims),
        "seed": ckpt.seed,
        "hyper": ckpt.hyper,
        "log_summary": ckpt.log_summary,
        "norm_stats": ckpt.norm_stats.to_dict(),
        "lstm": {
            name: getattr(ckpt.params.lstm, name).tolist()
            for name in _lstm_shapes(ckpt.dims)
        },
        "w_z": ckpt.params.mdn.w_z.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def _tensor(doc_part, shape: tuple[int, ...], name: str) -> np.ndarray:
    try:
        arr = np.asarray(doc_part, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CheckpointFormatError(f"tensor {name} is not numeric: {exc}") from exc
    if arr.shape != shape:
        raise CheckpointDimensionError(
            f"tensor {name} has shape {arr.shape}, expected {shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise CheckpointFormatError(f"tensor {name} contains non-finite values")
    return arr


def load(path) -> Checkpoint:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CheckpointFormatError(f"cannot read {path}: {exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointFormatError(f"{path}: not valid checkpoint text: {exc}") from exc
    if not isinstance(doc, dict):
        raise CheckpointFormatError(f"{path}: checkpoint root must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {version!r}, supported {FORMAT_VERSION}"
        )
    try:
        dims_doc = doc["dims"]
        dims = Dims(
            m=int(dims_doc["m"]),
            c=int(dims_doc["c"]),
            k=int(dims_doc["k"]),
            d=int(dims_doc["d"]),
            n_history=int(dims_doc["n_history"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointFormatError(f"{path}: bad dims: {exc}") from exc
    if min(dims.m, dims.c, dims.k, dims.d, dims.n_history) < 1:
        raise CheckpointDimensionError(f"{path}: non-positive dims {dims}")

    lstm_doc = doc.get("lstm")
    if not isinstance(lstm_doc, dict):
        raise CheckpointFormatError(f"{path}: missing lstm tensor block")
    tensors = {}
    for name, shape in _lstm_shapes(dims).items():
        if name not in lstm_doc:
            raise CheckpointFormatError(f"{path}: missing lstm tensor {name}")
        tensors[name] = _tensor(lstm_doc[name], shape, f"lstm.{name}")
    w_z = _tensor(doc.get("w_z"), (dims.k * (dims.d + 2), 2 * dims.m), "w_z")

    stats_doc = doc.get("norm_stats")
    if not isinstance(stats_doc, dict):
        raise CheckpointFormatError(f"{path}: missing norm_stats")
    mean = _tensor(stats_doc.get("mean"), (dims.c,), "norm_stats.mean")
    std = _tensor(stats_doc.get("std"), (dims.c,), "norm_stats.std")
    if np.any(std <= 0.0):
        raise CheckpointFormatError(f"{path}: non-positive normalization std")

    params = ModelParams(
        lstm.LstmParams(**tensors),
        mdn.MdnParams(w_z, dims.k, dims.d),
    )
    hyper = doc.get("hyper") or {}
    if not isinstance(hyper, dict):
        raise CheckpointFormatError(f"{path}: hyper must be an object")
    log_summary = doc.get("log_summary") or {}
    if not isinstance(log_summary, dict):
        raise CheckpointFormatError(f"{path}: log_summary must be an object")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise CheckpointFormatError(f"{path}: seed must be an integer")
    return Checkpoint(dims, params, NormStats(mean, std), hyper, log_summary, seed)
