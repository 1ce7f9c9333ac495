"""Training windows: fixed-length input sequences with the next wrench as label.

A window at pivot t spans samples t-n .. t as inputs and takes the commanded
wrench of sample t+1 as its label, so each window consumes n+2 underlying
samples. Enumeration with a stride is deterministic; the trainer instead
draws pivots uniformly at random to cover the data stochastically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FEATURE_DIM, WRENCH_START, demo_features
from .recording import Demonstration


@dataclass(frozen=True)
class TrainingWindow:
    inputs: np.ndarray  # (n+1, FEATURE_DIM), raw (unnormalized)
    label: np.ndarray   # (3,), raw wrench of the following sample


def window_count(demo_len: int, n_history: int, stride: int = 1) -> int:
    usable = demo_len - (n_history + 1)
    if usable <= 0:
        return 0
    return (usable + stride - 1) // stride


def make_windows(
    demo: Demonstration,
    n_history: int,
    stride: int = 1,
    goal_shift: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> list[TrainingWindow]:
    """Enumerate windows at pivots n, n+stride, ... len-2 (may be empty)."""
    if len(demo) < n_history + 2:
        return []
    feats = demo_features(demo, goal_shift)
    out = []
    for pivot in range(n_history, len(demo) - 1, stride):
        inputs = feats[pivot - n_history : pivot + 1]
        label = feats[pivot + 1, WRENCH_START:]
        out.append(TrainingWindow(inputs.copy(), label.copy()))
    return out


class WindowSampler:
    """Uniform random window draws across a dataset, batch-assembled.

    Holds one feature array per demonstration; a draw picks (demo, pivot)
    uniformly over all admissible windows.
    """

    def __init__(
        self,
        demos: list[Demonstration],
        n_history: int,
        goal_shift: tuple[float, float, float] = (0.0, 0.0, 0.0),
    ):
        self.n_history = n_history
        self.arrays = [demo_features(d, goal_shift) for d in demos]
        self.counts = np.array(
            [window_count(len(d), n_history) for d in demos], dtype=np.int64
        )
        self.total = int(self.counts.sum())
        self._offsets = np.concatenate([[0], np.cumsum(self.counts)])

    def locate(self, flat_index: int) -> tuple[int, int]:
        demo_idx = int(np.searchsorted(self._offsets, flat_index, side="right") - 1)
        pivot = self.n_history + (flat_index - int(self._offsets[demo_idx]))
        return demo_idx, pivot

    def gather(self, flat_indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(B, n+1, FEATURE_DIM) inputs and (B, 3) labels, raw units."""
        b = len(flat_indices)
        xs = np.empty((b, self.n_history + 1, FEATURE_DIM))
        ys = np.empty((b, 3))
        for row, flat in enumerate(flat_indices):
            demo_idx, pivot = self.locate(int(flat))
            arr = self.arrays[demo_idx]
            xs[row] = arr[pivot - self.n_history : pivot + 1]
            ys[row] = arr[pivot + 1, WRENCH_START:]
        return xs, ys

    def sample_batch(
        self, rng: np.random.Generator, batch_size: int
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        flat = rng.integers(0, self.total, size=batch_size)
        xs, ys = self.gather(flat)
        return xs, ys, flat

    def enumerate_all(self, stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
        flat = np.arange(0, self.total, stride, dtype=np.int64)
        return self.gather(flat)
