"""Single-layer LSTM with exact analytic backpropagation through time.

Forward consumes a window of input vectors and returns only the final
(hidden, cell) pair -- the encoding -- plus the cache needed for the backward
pass. All math is float64 numpy; the batched and single-sequence paths share
one implementation so stepwise and whole-sequence evaluation are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError

GATES = ("f", "i", "o", "c")


@dataclass
class LstmParams:
    w_f: np.ndarray  # (m, c) input weights per gate
    w_i: np.ndarray
    w_o: np.ndarray
    w_c: np.ndarray
    u_f: np.ndarray  # (m, m) recurrent weights per gate
    u_i: np.ndarray
    u_o: np.ndarray
    u_c: np.ndarray
    b_f: np.ndarray  # (m,) biases per gate
    b_i: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray

    @property
    def m(self) -> int:
        return self.w_f.shape[0]

    @property
    def c_dim(self) -> int:
        return self.w_f.shape[1]

    def stacked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gate-stacked (4m, c), (4m, m), (4m,) views in f, i, o, c order."""
        w = np.concatenate([self.w_f, self.w_i, self.w_o, self.w_c], axis=0)
        u = np.concatenate([self.u_f, self.u_i, self.u_o, self.u_c], axis=0)
        b = np.concatenate([self.b_f, self.b_i, self.b_o, self.b_c])
        return w, u, b


def zeros_like_params(params: LstmParams) -> LstmParams:
    return LstmParams(*(np.zeros_like(getattr(params, f.name)) for f in fields(LstmParams)))


def init_params(m: int, c: int, rng: np.random.Generator) -> LstmParams:
    """Uniform +-1/sqrt(m) weights; zero biases except forget bias 1.0."""
    if m < 1 or c < 1:
        raise ConfigError(f"LSTM dims must be >= 1, got m={m}, c={c}")
    bound = 1.0 / np.sqrt(m)
    def w():
        return rng.uniform(-bound, bound, size=(m, c))
    def u():
        return rng.uniform(-bound, bound, size=(m, m))
    return LstmParams(
        w_f=w(), w_i=w(), w_o=w(), w_c=w(),
        u_f=u(), u_i=u(), u_o=u(), u_c=u(),
        b_f=np.ones(m), b_i=np.zeros(m), b_o=np.zeros(m), b_c=np.zeros(m),
    )


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray


@dataclass
class LstmCache:
    x: np.ndarray        # (B, T, c)
    h0: np.ndarray       # (B, m)
    c0: np.ndarray
    f: np.ndarray        # (B, T, m) gate activations
    i: np.ndarray
    o: np.ndarray
    g: np.ndarray        # tanh cell-input transform
    cell: np.ndarray     # (B, T, m) cell states
    tanh_cell: np.ndarray


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign for stability at large |x|.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def forward_batch(
    params: LstmParams, x: np.ndarray, init: tuple[np.ndarray, np.ndarray] | None = None
) -> tuple[np.ndarray, np.ndarray, LstmCache]:
    """Run (B, T, c) input windows; returns final h, c (B, m) and the cache."""
    if x.ndim != 3:
        raise ConfigError(f"expected (B, T, c) input, got shape {x.shape}")
    B, T, cdim = x.shape
    if T < 1:
        raise ConfigError("empty input sequence")
    if cdim != params.c_dim:
        raise ConfigError(f"input dim {cdim} != params dim {params.c_dim}")
    m = params.m
    w, u, b = params.stacked()
    wt = w.T
    ut = u.T

    if init is None:
        h = np.zeros((B, m))
        cell = np.zeros((B, m))
    else:
        h, cell = init
        h = np.asarray(h, dtype=float).reshape(B, m).copy()
        cell = np.asarray(cell, dtype=float).reshape(B, m).copy()

    cache = LstmCache(
        x=x,
        h0=h.copy(),
        c0=cell.copy(),
        f=np.empty((B, T, m)),
        i=np.empty((B, T, m)),
        o=np.empty((B, T, m)),
        g=np.empty((B, T, m)),
        cell=np.empty((B, T, m)),
        tanh_cell=np.empty((B, T, m)),
    )
    for t in range(T):
        zbar = x[:, t, :] @ wt + h @ ut + b
        f_t = _sigmoid(zbar[:, 0 * m : 1 * m])
        i_t = _sigmoid(zbar[:, 1 * m : 2 * m])
        o_t = _sigmoid(zbar[:, 2 * m : 3 * m])
        g_t = np.tanh(zbar[:, 3 * m : 4 * m])
        cell = f_t * cell + i_t * g_t
        tc = np.tanh(cell)
        h = o_t * tc
        cache.f[:, t] = f_t
        cache.i[:, t] = i_t
        cache.o[:, t] = o_t
        cache.g[:, t] = g_t
        cache.cell[:, t] = cell
        cache.tanh_cell[:, t] = tc
    return h, cell, cache


def backward_batch(
    params: LstmParams,
    cache: LstmCache,
    grad_h: np.ndarray,
    grad_c: np.ndarray,
) -> tuple[LstmParams, np.ndarray]:
    """Exact gradients for upstream d/d(final h, c); also returns input grads.

    Parameter gradients are summed over the batch (scale the upstream grads
    for a mean loss). Returned as an LstmParams of matching shapes.
    """
    B, T, m = cache.f.shape
    if grad_h.shape != (B, m) or grad_c.shape != (B, m):
        raise ConfigError("upstream gradient shape mismatch with cache")
    w, u, _ = params.stacked()

    dW = np.zeros_like(w)
    dU = np.zeros_like(u)
    db = np.zeros(4 * m)
    dx = np.empty_like(cache.x)

    dh = grad_h.copy()
    dc = grad_c.copy()
    for t in range(T - 1, -1, -1):
        f_t = cache.f[:, t]
        i_t = cache.i[:, t]
        o_t = cache.o[:, t]
        g_t = cache.g[:, t]
        tc = cache.tanh_cell[:, t]
        if t > 0:
            cell_prev = cache.cell[:, t - 1]
            h_prev = cache.o[:, t - 1] * cache.tanh_cell[:, t - 1]
        else:
            cell_prev = cache.c0
            h_prev = cache.h0

        do = dh * tc
        dc = dc + dh * o_t * (1.0 - tc * tc)
        df = dc * cell_prev
        di = dc * g_t
        dg = dc * i_t

        dzbar = np.concatenate(
            [
                df * f_t * (1.0 - f_t),
                di * i_t * (1.0 - i_t),
                do * o_t * (1.0 - o_t),
                dg * (1.0 - g_t * g_t),
            ],
            axis=1,
        )
        dW += dzbar.T @ cache.x[:, t, :]
        dU += dzbar.T @ h_prev
        db += dzbar.sum(axis=0)
        dx[:, t, :] = dzbar @ w
        dh = dzbar @ u
        dc = dc * f_t

    grads = LstmParams(
        w_f=dW[0 * m : 1 * m], w_i=dW[1 * m : 2 * m],
        w_o=dW[2 * m : 3 * m], w_c=dW[3 * m : 4 * m],
        u_f=dU[0 * m : 1 * m], u_i=dU[1 * m : 2 * m],
        u_o=dU[2 * m : 3 * m], u_c=dU[3 * m : 4 * m],
        b_f=db[0 * m : 1 * m], b_i=db[1 * m : 2 * m],
        b_o=db[2 * m : 3 * m], b_c=db[3 * m : 4 * m],
    )
    return grads, dx


def forward(
    params: LstmParams,
    seq: np.ndarray,
    init: LstmState | None = None,
) -> tuple[LstmState, LstmCache]:
    """Single-sequence (T, c) forward returning the final encoding."""
    seq = np.asarray(seq, dtype=float)
    if seq.ndim == 1:
        seq = seq[None, :]
    init_hc = None if init is None else (init.h[None, :], init.c[None, :])
    h, cell, cache = forward_batch(params, seq[None, :, :], init_hc)
    return LstmState(h[0], cell[0]), cache


def backward(
    params: LstmParams,
    cache: LstmCache,
    grad_h: np.ndarray,
    grad_c: np.ndarray,
) -> tuple[LstmParams, np.ndarray]:
    """Single-sequence wrapper around `backward_batch`."""
    grads, dx = backward_batch(params, cache, grad_h[None, :], grad_c[None, :])
    return grads, dx[0]
