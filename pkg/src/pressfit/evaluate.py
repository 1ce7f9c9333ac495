"""Seeded multi-trial evaluation of a deployment policy.

Each trial gets an independent deterministic RNG derived from (seed, trial
index), so reports are reproducible and trials can run in parallel workers
and still merge identically by index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from .admittance import ControllerConfig
from .checkpoint import Checkpoint
from .config import SimConfig
from .deploy import EpisodeLog, ModelPolicy, ZeroPolicy, deploy


@dataclass
class TrialResult:
    index: int
    success: bool
    fault: bool
    duration: float
    final_distance: float
    distance_trace: list[float] = field(default_factory=list)
    trace_t: list[float] = field(default_factory=list)


@dataclass
class EvalReport:
    model_name: str
    trials: int
    successes: int
    success_rate: float
    completion_times: list[float]        # successful trials only
    outliers: list[int]                  # slow-success trial indices
    faults: list[int]
    results: list[TrialResult]
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "completion_times": self.completion_times,
            "outliers": self.outliers,
            "faults": self.faults,
            "config": self.config,
            "per_trial": [
                {
                    "index": r.index,
                    "success": r.success,
                    "fault": r.fault,
                    "duration": r.duration,
                    "final_distance": r.final_distance,
                }
                for r in self.results
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _flag_outliers(results: list[TrialResult]) -> list[int]:
    """Successful runs whose completion time sits beyond Q3 + 1.5 IQR."""
    times = np.array([r.duration for r in results if r.success])
    if len(times) < 4:
        return []
    q1, q3 = np.percentile(times, [25.0, 75.0])
    cut = q3 + 1.5 * (q3 - q1)
    return [r.index for r in results if r.success and r.duration > cut]


def _trial_args(i, policy_spec, sim_cfg, ctrl_cfg, cutoff, threshold, seed):
    return (i, policy_spec, sim_cfg, ctrl_cfg, cutoff, threshold, seed)


def _make_policy(policy_spec):
    kind = policy_spec["kind"]
    if kind == "zero":
        return ZeroPolicy()
    if kind == "model":
        return ModelPolicy(
            policy_spec["checkpoint"],
            temperature=policy_spec.get("temperature", 1.0),
            goal_shift=policy_spec.get("goal_shift", (0.0, 0.0, 0.0)),
        )
    raise ValueError(f"unknown policy kind {kind!r}")


def _run_trial(args) -> TrialResult:
    i, policy_spec, sim_cfg, ctrl_cfg, cutoff, threshold, seed = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
    log: EpisodeLog = deploy(
        _make_policy(policy_spec), sim_cfg, ctrl_cfg, rng,
        max_time=cutoff, success_threshold=threshold,
    )
    return TrialResult(
        i, log.success, log.fault, log.duration, log.final_distance,
        log.tick_distance, log.tick_t,
    )


def evaluate(
    checkpoint: Checkpoint | None,
    sim_cfg: SimConfig,
    ctrl_cfg: ControllerConfig,
    trials: int = 30,
    cutoff: float = 30.0,
    threshold: float = 0.001,
    seed: int = 0,
    temperature: float = 1.0,
    workers: int = 1,
    model_name: str = "model",
    policy_kind: str = "model",
) -> EvalReport:
    """Success statistics over seeded trials; `checkpoint None` + kind `zero`
    evaluates the no-command baseline."""
    policy_spec: dict = {"kind": policy_kind}
    if policy_kind == "model":
        if checkpoint is None:
            raise ValueError("model evaluation requires a checkpoint")
        policy_spec["checkpoint"] = checkpoint
        policy_spec["temperature"] = temperature
        policy_spec["goal_shift"] = sim_cfg.goal_shift
    args = [
        _trial_args(i, policy_spec, sim_cfg, ctrl_cfg, cutoff, threshold, seed)
        for i in range(trials)
    ]
    if workers > 1:
        with get_context("spawn").Pool(workers) as pool:
            results = pool.map(_run_trial, args)
    else:
        results = [_run_trial(a) for a in args]
    results.sort(key=lambda r: r.index)
    successes = sum(1 for r in results if r.success)
    report = EvalReport(
        model_name=model_name,
        trials=trials,
        successes=successes,
        success_rate=successes / trials if trials else 0.0,
        completion_times=[r.duration for r in results if r.success],
        outliers=_flag_outliers(results),
        faults=[r.index for r in results if r.fault],
        results=results,
        config={
            "cutoff": cutoff,
            "threshold": threshold,
            "seed": seed,
            "temperature": temperature,
            "trials": trials,
        },
    )
    return report
