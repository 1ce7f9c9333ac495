"""Mixture-density output head over the next wrench.

A single bias-free linear layer maps the encoding [h; c] to logits that
parameterize k isotropic Gaussians: mixing weights by softmax, means
directly, scales by exponential (floored to avoid collapse). The loss is the
negative log of the mixture density, evaluated in log space throughout so
extreme logits stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

SIGMA_FLOOR = 1e-4
LOG_SIGMA_FLOOR = math.log(SIGMA_FLOOR)
LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class MdnParams:
    w_z: np.ndarray  # (k*(d+2), 2m), no bias
    k: int
    d: int

    def __post_init__(self):
        if self.w_z.shape[0] != self.k * (self.d + 2):
            raise ConfigError(
                f"w_z rows {self.w_z.shape[0]} != k(d+2) = {self.k * (self.d + 2)}"
            )


def init_params(k: int, d: int, m: int, rng: np.random.Generator) -> MdnParams:
    if k < 1 or d < 1 or m < 1:
        raise ConfigError(f"MDN dims must be >= 1, got k={k}, d={d}, m={m}")
    bound = 1.0 / np.sqrt(2 * m)
    return MdnParams(rng.uniform(-bound, bound, size=(k * (d + 2), 2 * m)), k, d)


@dataclass
class MixtureParams:
    alpha: np.ndarray  # (k,) mixing weights, sum to 1
    mu: np.ndarray     # (k, d) component centers
    sigma: np.ndarray  # (k,) isotropic scales, >= SIGMA_FLOOR


@dataclass
class MixtureCache:
    """Batched mixture quantities kept in log space for the backward pass."""

    log_alpha: np.ndarray  # (B, k)
    mu: np.ndarray         # (B, k, d)
    log_sigma: np.ndarray  # (B, k), after flooring
    floored: np.ndarray    # (B, k) bool, True where the floor clipped
    enc: np.ndarray | None = None  # (B, 2m) input to the linear layer


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def mixture_from_logits(z: np.ndarray, k: int, d: int) -> MixtureCache:
    """Split raw logits (B, k(d+2)) into the (z_alpha, z_mu, z_sigma) tuple."""
    if z.ndim == 1:
        z = z[None, :]
    if z.shape[1] != k * (d + 2):
        raise ConfigError(f"logit dim {z.shape[1]} != k(d+2) = {k * (d + 2)}")
    b = z.shape[0]
    z_alpha = z[:, :k]
    z_mu = z[:, k : k + k * d].reshape(b, k, d)
    z_sigma = z[:, k + k * d :]
    floored = z_sigma < LOG_SIGMA_FLOOR
    log_sigma = np.where(floored, LOG_SIGMA_FLOOR, z_sigma)
    return MixtureCache(_log_softmax(z_alpha), z_mu.copy(), log_sigma, floored)


def cache_to_params(cache: MixtureCache, row: int = 0) -> MixtureParams:
    alpha = np.exp(cache.log_alpha[row])
    # exp(log(floor)) can round a hair below the floor; re-clamp.
    sigma = np.maximum(np.exp(cache.log_sigma[row]), SIGMA_FLOOR)
    assert abs(alpha.sum() - 1.0) <= 1e-12
    assert np.all(sigma >= SIGMA_FLOOR)
    return MixtureParams(alpha, cache.mu[row].copy(), sigma)


def head_forward(params: MdnParams, h: np.ndarray, c: np.ndarray) -> MixtureParams:
    """Mixture parameters for one encoding (h, c)."""
    enc = np.concatenate([h, c])
    if enc.shape[0] != params.w_z.shape[1]:
        raise ConfigError(
            f"encoding dim {enc.shape[0]} != 2m = {params.w_z.shape[1]}"
        )
    z = enc @ params.w_z.T
    return cache_to_params(mixture_from_logits(z, params.k, params.d))


def head_forward_batch(
    params: MdnParams, h: np.ndarray, c: np.ndarray
) -> MixtureCache:
    enc = np.concatenate([h, c], axis=1)
    if enc.shape[1] != params.w_z.shape[1]:
        raise ConfigError(
            f"encoding dim {enc.shape[1]} != 2m = {params.w_z.shape[1]}"
        )
    cache = mixture_from_logits(enc @ params.w_z.T, params.k, params.d)
    cache.enc = enc
    return cache


def log_component_density(
    y: np.ndarray, mu: np.ndarray, log_sigma: np.ndarray, d: int
) -> np.ndarray:
    """Log of the isotropic Gaussian density, broadcast over components."""
    sq = np.sum((y[..., None, :] - mu) ** 2, axis=-1)
    inv_var = np.exp(-2.0 * log_sigma)
    return -0.5 * d * LOG_2PI - d * log_sigma - 0.5 * sq * inv_var


def component_density(y: np.ndarray, mu_i: np.ndarray, sigma_i: float) -> float:
    """Density of one isotropic Gaussian component at y."""
    y = np.asarray(y, dtype=float)
    d = y.shape[-1]
    log_phi = log_component_density(
        y[None, :], np.asarray(mu_i, dtype=float)[None, :],
        np.array([math.log(sigma_i)]), d,
    )
    return float(np.exp(log_phi[0, 0]))


def nll_from_cache(cache: MixtureCache, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample NLL (B,) plus the joint log terms needed for backward."""
    d = cache.mu.shape[-1]
    log_phi = log_component_density(y, cache.mu, cache.log_sigma, d)
    joint = cache.log_alpha + log_phi
    mx = joint.max(axis=1, keepdims=True)
    ll = mx[:, 0] + np.log(np.exp(joint - mx).sum(axis=1))
    return -ll, joint


def nll_loss(mix: MixtureParams, y: np.ndarray) -> float:
    """Negative log mixture density at y (log-sum-exp over components)."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        log_alpha = np.log(mix.alpha)
    cache = MixtureCache(
        log_alpha[None, :],
        mix.mu[None, :, :],
        np.log(mix.sigma)[None, :],
        np.zeros((1, len(mix.alpha)), dtype=bool),
    )
    nll, _ = nll_from_cache(cache, y[None, :])
    return float(nll[0])


def backward_from_cache(
    cache: MixtureCache,
    joint: np.ndarray,
    nll: np.ndarray,
    y: np.ndarray,
    w_z: np.ndarray,
    dnll: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of sum(dnll * nll) w.r.t. w_z and the encoding halves.

    Responsibilities come from the cached joint log terms; flooring of sigma
    zeroes the corresponding scale-logit gradients.
    """
    b, k = cache.log_alpha.shape
    d = cache.mu.shape[-1]
    resp = np.exp(joint + nll[:, None])  # softmax over components
    alpha = np.exp(cache.log_alpha)
    scale = dnll[:, None]

    dz_alpha = (alpha - resp) * scale
    inv_var = np.exp(-2.0 * cache.log_sigma)
    diff = cache.mu - y[:, None, :]
    dz_mu = resp[:, :, None] * inv_var[:, :, None] * diff * scale[:, :, None]
    sq = np.sum(diff**2, axis=-1)
    dz_sigma = resp * (d - sq * inv_var) * scale
    dz_sigma[cache.floored] = 0.0

    dz = np.concatenate([dz_alpha, dz_mu.reshape(b, k * d), dz_sigma], axis=1)
    dw_z = dz.T @ cache.enc
    denc = dz @ w_z
    m2 = cache.enc.shape[1] // 2
    return dw_z, denc[:, :m2], denc[:, m2:]


def sample(
    mix: MixtureParams, rng: np.random.Generator, temperature: float = 1.0
) -> np.ndarray:
    """Ancestral draw; temperature scales both the choice and the spread.

    temperature 0 returns the mean of the most likely component.
    """
    if temperature < 0.0:
        raise ConfigError("temperature must be >= 0")
    if temperature == 0.0:
        return mix.mu[int(np.argmax(mix.alpha))].copy()
    with np.errstate(divide="ignore"):
        logits = np.log(mix.alpha) / temperature
    logits -= logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    idx = int(np.searchsorted(np.cumsum(probs), rng.random()))
    idx = min(idx, len(probs) - 1)
    eps = rng.standard_normal(mix.mu.shape[1])
    return mix.mu[idx] + mix.sigma[idx] * math.sqrt(temperature) * eps
