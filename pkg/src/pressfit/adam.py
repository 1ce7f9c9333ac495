"""Adam with global-norm gradient clipping over the model's named tensors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import ModelGrads, ModelParams, named_arrays, named_grad_arrays


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(params: ModelParams) -> AdamState:
    state = AdamState()
    for name, arr in named_arrays(params):
        state.m[name] = np.zeros_like(arr)
        state.v[name] = np.zeros_like(arr)
    return state


def global_grad_norm(grads: ModelGrads) -> float:
    total = 0.0
    for _, g in named_grad_arrays(grads):
        total += float(np.sum(g * g))
    return math.sqrt(total)


def adam_step(
    state: AdamState,
    params: ModelParams,
    grads: ModelGrads,
    lr: float,
    clip_norm: float = 10.0,
) -> float:
    """In-place update; returns the pre-clip gradient norm."""
    norm = global_grad_norm(grads)
    scale = 1.0
    if clip_norm > 0.0 and norm > clip_norm:
        scale = clip_norm / norm
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    grad_map = dict(named_grad_arrays(grads))
    for name, p in named_arrays(params):
        g = grad_map[name] * scale
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return norm
