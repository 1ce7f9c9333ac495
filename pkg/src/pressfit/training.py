"""Minibatch training with random window draws and held-out evaluation.

Each step draws a batch of windows uniformly over the training demos,
computes the mean mixture NLL with exact gradients, and applies a clipped
Adam update. A fraction of demonstrations (whole demos, not windows) is held
out; its loss is evaluated on a fixed cadence and forms the learning curve.
Fully deterministic for a given seed.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .adam import adam_step, init_adam
from .analysis import partition_by_duration, QUARTILE_PART_NAMES
from .checkpoint import Checkpoint
from .errors import ConfigError, DataError, TrainingDiverged
from .features import FEATURE_DIM, WRENCH_START, NormStats, fit_norm_stats
from .network import Dims, LstmMdn
from .recording import Demonstration
from .windows import WindowSampler

log = logging.getLogger(__name__)

WRENCH_DIM = 3


@dataclass
class Hyper:
    k: int = 4
    n_history: int = 25
    m: int = 64
    learning_rate: float = 5e-4
    batch_size: int = 128
    steps: int = 2000
    seed: int = 0
    eval_every: int = 50
    eval_max_windows: int = 2048
    holdout_frac: float = 0.1
    mirror_augment: bool = True
    input_wrench_noise: float = 0.0   # optional train-time noise on wrench features
    input_state_noise: float = 0.15   # train-time noise on pose/twist features
    clip_norm: float = 10.0
    temperature: float = 1.0  # deployment default carried in the checkpoint
    stop_eval_ratio: float | None = None  # early stop when eval <= ratio * initial

    def validate(self) -> None:
        if min(self.k, self.n_history, self.m, self.batch_size, self.steps) < 1:
            raise ConfigError(f"non-positive hyperparameter in {self}")
        if self.learning_rate <= 0.0 or self.eval_every < 1:
            raise ConfigError("learning_rate and eval_every must be positive")
        if not (0.0 <= self.holdout_frac < 1.0):
            raise ConfigError("holdout_frac must be in [0, 1)")
        if self.temperature < 0.0:
            raise ConfigError("temperature must be >= 0")


@dataclass
class CurvePoint:
    step: int
    batch_loss: float
    eval_loss: float | None = None


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    curve: list[CurvePoint]
    eval_initial: float
    eval_final: float
    steps_run: int


def curve_to_csv(curve: list[CurvePoint]) -> str:
    lines = ["step,batch_loss,eval_loss"]
    for p in curve:
        ev = "" if p.eval_loss is None else repr(p.eval_loss)
        lines.append(f"{p.step},{repr(p.batch_loss)},{ev}")
    return "\n".join(lines) + "\n"


def split_holdout(
    demos: list[Demonstration], frac: float, rng: np.random.Generator
) -> tuple[list[Demonstration], list[Demonstration]]:
    """Split by demonstration (never by window)."""
    if len(demos) < 2 or frac <= 0.0:
        return list(demos), []
    order = rng.permutation(len(demos))
    n_eval = max(1, int(round(frac * len(demos))))
    if n_eval >= len(demos):
        n_eval = len(demos) - 1
    eval_idx = set(int(i) for i in order[:n_eval])
    train = [d for i, d in enumerate(demos) if i not in eval_idx]
    held = [d for i, d in enumerate(demos) if i in eval_idx]
    return train, held


def _normalize_sampler(sampler: WindowSampler, stats: NormStats) -> None:
    for arr in sampler.arrays:
        arr -= stats.mean
        arr /= stats.std


# Lateral mirror in feature space: x, sin(theta), vx, omega, fx, tau flip sign.
_MIRROR_SIGNS = np.array([-1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0])


def _mirror_sampler(sampler: WindowSampler) -> None:
    """Append laterally mirrored copies of every demo's features (the task
    physics is exactly mirror-symmetric, so mirrored windows are valid)."""
    mirrored = [arr * _MIRROR_SIGNS for arr in sampler.arrays]
    sampler.arrays.extend(mirrored)
    sampler.counts = np.concatenate([sampler.counts, sampler.counts])
    sampler.total = int(sampler.counts.sum())
    sampler._offsets = np.concatenate([[0], np.cumsum(sampler.counts)])


def train(
    demos: list[Demonstration],
    hyper: Hyper,
    goal_shift: tuple[float, float, float] = (0.0, 0.0, 0.0),
    sim_config_hash: str = "",
) -> TrainResult:
    hyper.validate()
    if not demos:
        raise DataError("training requires at least one demonstration")
    rng = np.random.default_rng(hyper.seed)

    train_demos, eval_demos = split_holdout(demos, hyper.holdout_frac, rng)
    sampler = WindowSampler(train_demos, hyper.n_history, goal_shift)
    if sampler.total < 1:
        raise DataError(
            f"no training windows: demos shorter than n_history+2 = {hyper.n_history + 2}"
        )
    if hyper.mirror_augment and goal_shift == (0.0, 0.0, 0.0):
        # A shifted goal frame breaks lateral symmetry; only augment without it.
        _mirror_sampler(sampler)
    stats = fit_norm_stats(sampler.arrays)
    _normalize_sampler(sampler, stats)

    eval_x = eval_y = None
    if eval_demos:
        eval_sampler = WindowSampler(eval_demos, hyper.n_history, goal_shift)
        if eval_sampler.total > 0:
            _normalize_sampler(eval_sampler, stats)
            stride = max(1, -(-eval_sampler.total // hyper.eval_max_windows))
            eval_x, eval_y = eval_sampler.enumerate_all(stride)

    dims = Dims(m=hyper.m, c=FEATURE_DIM, k=hyper.k, d=WRENCH_DIM,
                n_history=hyper.n_history)
    model = LstmMdn(dims)
    params = model.init_params(rng)
    adam = init_adam(params)

    def eval_loss() -> float | None:
        if eval_x is None:
            return None
        return model.loss_batch(params, eval_x, eval_y)

    curve: list[CurvePoint] = []
    initial_eval = eval_loss()
    t_start = time.time()
    steps_run = 0
    last_eval = initial_eval
    for step in range(1, hyper.steps + 1):
        xs, ys, flat = sampler.sample_batch(rng, hyper.batch_size)
        if hyper.input_state_noise > 0.0:
            # Perturb pose/twist inputs (labels stay exact): the learned
            # policy then behaves consistently in a band around the
            # demonstrated state manifold instead of only on it.
            xs[:, :, :WRENCH_START] += hyper.input_state_noise * rng.standard_normal(
                xs[:, :, :WRENCH_START].shape
            )
        if hyper.input_wrench_noise > 0.0:
            # Corrupt input wrench features (never the labels) so the model
            # cannot lean purely on command continuation.
            xs[:, :, WRENCH_START:] += hyper.input_wrench_noise * rng.standard_normal(
                xs[:, :, WRENCH_START:].shape
            )
        loss, grads = model.loss_and_grads(params, xs, ys)
        if not np.isfinite(loss):
            raise TrainingDiverged(
                f"non-finite batch loss at step {step}",
                step=step,
                batch_info={"window_indices": [int(i) for i in flat]},
            )
        adam_step(adam, params, grads, hyper.learning_rate, hyper.clip_norm)
        steps_run = step
        point = CurvePoint(step, loss)
        if step % hyper.eval_every == 0 or step == hyper.steps:
            point.eval_loss = eval_loss()
            if point.eval_loss is not None:
                last_eval = point.eval_loss
        curve.append(point)
        if (
            hyper.stop_eval_ratio is not None
            and point.eval_loss is not None
            and initial_eval is not None
            and point.eval_loss <= hyper.stop_eval_ratio * initial_eval
        ):
            log.info("early stop at step %d: eval %.4f <= %.2f * initial %.4f",
                     step, point.eval_loss, hyper.stop_eval_ratio, initial_eval)
            break

    final_eval = last_eval
    summary = {
        "steps_run": steps_run,
        "train_demos": len(train_demos),
        "eval_demos": len(eval_demos),
        "train_windows": sampler.total,
        "eval_initial_nll": initial_eval,
        "eval_final_nll": final_eval,
        "final_batch_nll": curve[-1].batch_loss if curve else None,
        "wall_seconds": round(time.time() - t_start, 3),
        "sim_config_hash": sim_config_hash,
    }
    ckpt = Checkpoint(
        dims=dims,
        params=params,
        norm_stats=stats,
        hyper=asdict(hyper),
        log_summary=summary,
        seed=hyper.seed,
    )
    nan = float("nan")
    return TrainResult(
        ckpt,
        curve,
        initial_eval if initial_eval is not None else nan,
        final_eval if final_eval is not None else nan,
        steps_run,
    )


@dataclass
class QuartileSuite:
    thresholds: tuple[float, float, float]
    results: dict[str, TrainResult] = field(default_factory=dict)


def train_quartile_suite(
    demos: list[Demonstration],
    hyper: Hyper,
    goal_shift: tuple[float, float, float] = (0.0, 0.0, 0.0),
    sim_config_hash: str = "",
) -> QuartileSuite:
    """Train one model per duration quartile plus the full set.

    Every model uses identical hyperparameters and seed so curves overlay.
    """
    split = partition_by_duration(demos)
    suite = QuartileSuite((split.q1, split.q2, split.q3))
    for name in QUARTILE_PART_NAMES:
        part = split.parts[name]
        usable = [d for d in part if len(d) >= hyper.n_history + 2]
        if not usable:
            log.warning("quartile %s has no usable windows; skipped", name)
            continue
        suite.results[name] = train(
            usable, hyper, goal_shift=goal_shift, sim_config_hash=sim_config_hash
        )
    return suite
