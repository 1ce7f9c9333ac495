"""Central finite-difference verification of the analytic gradients.

Checks every scalar parameter of the end-to-end window loss. The reported
relative error uses a small absolute floor in the denominator: below it,
central differences are dominated by cancellation noise rather than by the
gradient being wrong, so near-zero coordinates are compared absolutely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import LstmMdn, ModelParams, named_arrays, named_grad_arrays

REL_FLOOR = 1e-3


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_name: str
    worst_index: tuple
    n_coords: int

    def __str__(self) -> str:
        return (
            f"max relative error {self.max_rel_error:.3e} at "
            f"{self.worst_name}{list(self.worst_index)} over {self.n_coords} coordinates"
        )


def grad_check(
    model: LstmMdn,
    params: ModelParams,
    window: np.ndarray,
    label: np.ndarray,
    eps: float = 1e-5,
) -> GradCheckReport:
    """Compare analytic gradients against central differences, per scalar."""
    x = np.asarray(window, dtype=float)[None, :, :]
    y = np.asarray(label, dtype=float)[None, :]
    _, grads = model.loss_and_grads(params, x, y)
    grad_map = dict(named_grad_arrays(grads))

    worst = 0.0
    worst_name = ""
    worst_index: tuple = ()
    n = 0
    for name, tensor in named_arrays(params):
        analytic = grad_map[name]
        it = np.nditer(tensor, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            old = tensor[idx]
            tensor[idx] = old + eps
            lp = model.loss_batch(params, x, y)
            tensor[idx] = old - eps
            lm = model.loss_batch(params, x, y)
            tensor[idx] = old
            fd = (lp - lm) / (2.0 * eps)
            a = analytic[idx]
            rel = abs(a - fd) / max(abs(a), abs(fd), REL_FLOOR)
            n += 1
            if rel > worst:
                worst = rel
                worst_name = name
                worst_index = idx
    return GradCheckReport(worst, worst_name, worst_index, n)
