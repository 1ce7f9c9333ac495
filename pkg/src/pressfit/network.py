"""Recurrent mixture model: LSTM encoder feeding the mixture-density head.

Bundles parameters, the batched end-to-end loss with exact gradients, and
the incremental inference path used during deployment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lstm, mdn
from .errors import ConfigError


@dataclass(frozen=True)
class Dims:
    m: int          # LSTM cells
    c: int          # input feature dim
    k: int          # mixture components
    d: int          # output (wrench) dim
    n_history: int  # window history length N

    def validate(self) -> None:
        if min(self.m, self.c, self.k, self.d) < 1 or self.n_history < 1:
            raise ConfigError(f"bad model dims {self}")


@dataclass
class ModelParams:
    lstm: lstm.LstmParams
    mdn: mdn.MdnParams


@dataclass
class ModelGrads:
    lstm: lstm.LstmParams  # same shapes as the parameters
    w_z: np.ndarray


LSTM_TENSOR_NAMES = (
    "w_f", "w_i", "w_o", "w_c",
    "u_f", "u_i", "u_o", "u_c",
    "b_f", "b_i", "b_o", "b_c",
)


def named_arrays(params: ModelParams) -> list[tuple[str, np.ndarray]]:
    """Fixed-order (name, tensor) pairs over every learnable array."""
    out = [(f"lstm.{n}", getattr(params.lstm, n)) for n in LSTM_TENSOR_NAMES]
    out.append(("mdn.w_z", params.mdn.w_z))
    return out


def named_grad_arrays(grads: ModelGrads) -> list[tuple[str, np.ndarray]]:
    out = [(f"lstm.{n}", getattr(grads.lstm, n)) for n in LSTM_TENSOR_NAMES]
    out.append(("mdn.w_z", grads.w_z))
    return out


class LstmMdn:
    """End-to-end model over fixed-length windows."""

    def __init__(self, dims: Dims):
        dims.validate()
        self.dims = dims

    def init_params(self, rng: np.random.Generator) -> ModelParams:
        return ModelParams(
            lstm.init_params(self.dims.m, self.dims.c, rng),
            mdn.init_params(self.dims.k, self.dims.d, self.dims.m, rng),
        )

    def loss_batch(self, params: ModelParams, x: np.ndarray, y: np.ndarray) -> float:
        h, c, _ = lstm.forward_batch(params.lstm, x)
        cache = mdn.head_forward_batch(params.mdn, h, c)
        nll, _ = mdn.nll_from_cache(cache, y)
        return float(nll.mean())

    def loss_and_grads(
        self, params: ModelParams, x: np.ndarray, y: np.ndarray
    ) -> tuple[float, ModelGrads]:
        """Mean NLL over the batch and exact gradients for every tensor."""
        b = x.shape[0]
        h, c, lstm_cache = lstm.forward_batch(params.lstm, x)
        head_cache = mdn.head_forward_batch(params.mdn, h, c)
        nll, joint = mdn.nll_from_cache(head_cache, y)
        mean_nll = float(nll.mean())
        dnll = np.full(b, 1.0 / b)
        dw_z, dh, dc = mdn.backward_from_cache(
            head_cache, joint, nll, y, params.mdn.w_z, dnll
        )
        lstm_grads, _ = lstm.backward_batch(params.lstm, lstm_cache, dh, dc)
        return mean_nll, ModelGrads(lstm_grads, dw_z)

    def mixture_for_window(
        self, params: ModelParams, window: np.ndarray
    ) -> mdn.MixtureParams:
        """Mixture conditioned on one (T, c) window from a zero state."""
        state, _ = lstm.forward(params.lstm, np.asarray(window, dtype=float))
        return mdn.head_forward(params.mdn, state.h, state.c)

    def step_state(
        self,
        params: ModelParams,
        state: lstm.LstmState | None,
        x_t: np.ndarray,
    ) -> tuple[lstm.LstmState, mdn.MixtureParams]:
        """Incremental inference: thread the encoding one input at a time."""
        if state is None:
            state = lstm.LstmState(np.zeros(self.dims.m), np.zeros(self.dims.m))
        new_state, _ = lstm.forward(params.lstm, x_t[None, :], init=state)
        return new_state, mdn.head_forward(params.mdn, new_state.h, new_state.c)
