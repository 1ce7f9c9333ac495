import math

import numpy as np
import pytest

from pressfit import checkpoint as ckpt_mod
from pressfit.adam import adam_step, init_adam
from pressfit.errors import (
    CheckpointDimensionError,
    CheckpointFormatError,
    CheckpointVersionError,
    ConfigError,
    DataError,
    TrainingDiverged,
)
from pressfit.features import FEATURE_DIM, NormStats
from pressfit.geometry import Pose, Twist, Wrench
from pressfit.gradcheck import grad_check
from pressfit.network import Dims, LstmMdn, ModelGrads, named_arrays
from pressfit.recording import DemoSample, Demonstration
from pressfit.training import (
    Hyper,
    curve_to_csv,
    split_holdout,
    train,
    train_quartile_suite,
)


def patterned_demo(rng, n=120, demo_id="d0", dt=0.01):
    """Smooth, learnable wrench pattern keyed to the sample phase."""
    samples = []
    phase = rng.uniform(0, 2 * math.pi)
    for i in range(n):
        t = i * dt
        fx = 2.0 * math.sin(2 * math.pi * 0.8 * t + phase)
        fz = -5.0 + 1.5 * math.cos(2 * math.pi * 0.5 * t + phase)
        tau = 0.1 * math.sin(2 * math.pi * 1.1 * t + phase)
        samples.append(
            DemoSample(
                t,
                Pose(0.001 * math.sin(t), 0.03 - 0.002 * t, 0.05 * math.cos(t)),
                Twist(0.01, -0.02, 0.0),
                Wrench(fx, fz, tau),
            )
        )
    return Demonstration(demo_id, "h", dt, samples, True, "scripted")


def small_hyper(**kw):
    defaults = dict(
        k=2, n_history=6, m=8, learning_rate=3e-3, batch_size=16, steps=30,
        eval_every=10, seed=7,
    )
    defaults.update(kw)
    return Hyper(**defaults)


def demo_set(rng, count=12, n=120):
    return [patterned_demo(rng, n=n, demo_id=f"d{i}") for i in range(count)]


# --- gradient checking -----------------------------------------------------

def test_grad_check_random_instance(rng):
    model = LstmMdn(Dims(m=8, c=10, k=3, d=3, n_history=5))
    params = model.init_params(rng)
    window = rng.normal(size=(6, 10)) * 0.8
    label = rng.normal(size=3) * 0.8
    report = grad_check(model, params, window, label)
    assert report.max_rel_error < 1e-6
    assert report.n_coords == 8 * 10 * 4 + 8 * 8 * 4 + 8 * 4 + 3 * 5 * 16


def test_taylor_first_order(rng):
    model = LstmMdn(Dims(m=4, c=5, k=2, d=3, n_history=4))
    params = model.init_params(rng)
    x = rng.normal(size=(1, 5, 5)) * 0.5
    y = rng.normal(size=(1, 3)) * 0.5
    loss0, grads = model.loss_and_grads(params, x, y)
    delta = 1e-3
    g = grads.lstm.w_i[1, 2]
    params.lstm.w_i[1, 2] += delta
    loss1 = model.loss_batch(params, x, y)
    assert loss1 - loss0 == pytest.approx(g * delta, abs=5e-5)


# --- optimizer ---------------------------------------------------------------

def test_adam_zero_gradient_no_move(rng):
    model = LstmMdn(Dims(m=3, c=4, k=2, d=3, n_history=3))
    params = model.init_params(rng)
    before = {n: a.copy() for n, a in named_arrays(params)}
    zero = ModelGrads(
        type(params.lstm)(*(np.zeros_like(a) for _, a in named_arrays(params)[:12])),
        np.zeros_like(params.mdn.w_z),
    )
    state = init_adam(params)
    adam_step(state, params, zero, lr=1e-2)
    for name, arr in named_arrays(params):
        assert np.array_equal(arr, before[name])


def test_adam_clip_norm(rng):
    model = LstmMdn(Dims(m=3, c=4, k=2, d=3, n_history=3))
    params = model.init_params(rng)
    x = rng.normal(size=(2, 4, 4)) * 50.0
    y = rng.normal(size=(2, 3)) * 50.0
    _, grads = model.loss_and_grads(params, x, y)
    state = init_adam(params)
    norm = adam_step(state, params, grads, lr=1e-3, clip_norm=1.0)
    assert norm > 1.0  # this instance produces large gradients
    for _, arr in named_arrays(params):
        assert np.all(np.isfinite(arr))


# --- loss batching properties ------------------------------------------------

def test_batch_of_identical_windows_equals_single(rng):
    model = LstmMdn(Dims(m=5, c=6, k=3, d=3, n_history=4))
    params = model.init_params(rng)
    x1 = rng.normal(size=(1, 5, 6))
    y1 = rng.normal(size=(1, 3))
    xB = np.repeat(x1, 32, axis=0)
    yB = np.repeat(y1, 32, axis=0)
    assert model.loss_batch(params, xB, yB) == pytest.approx(
        model.loss_batch(params, x1, y1), rel=1e-12
    )


def test_batch_order_invariance(rng):
    model = LstmMdn(Dims(m=5, c=6, k=3, d=3, n_history=4))
    params = model.init_params(rng)
    x = rng.normal(size=(16, 5, 6))
    y = rng.normal(size=(16, 3))
    perm = rng.permutation(16)
    a = model.loss_batch(params, x, y)
    b = model.loss_batch(params, x[perm], y[perm])
    assert a == pytest.approx(b, rel=1e-12)


# --- training loop -----------------------------------------------------------

def test_training_deterministic(rng):
    demos = demo_set(rng)
    r1 = train(demos, small_hyper())
    r2 = train(demos, small_hyper())
    assert [p.batch_loss for p in r1.curve] == [p.batch_loss for p in r2.curve]
    assert [p.eval_loss for p in r1.curve] == [p.eval_loss for p in r2.curve]
    a = r1.checkpoint.params.mdn.w_z
    b = r2.checkpoint.params.mdn.w_z
    assert np.array_equal(a, b)


def test_training_learns_pattern(rng):
    demos = demo_set(rng, count=16)
    result = train(demos, small_hyper(steps=150, eval_every=25))
    assert result.eval_final < result.eval_initial


def test_training_empty_raises():
    with pytest.raises(DataError):
        train([], small_hyper())


def test_training_too_short_demos_raise(rng):
    demos = [patterned_demo(rng, n=5)]
    with pytest.raises(DataError):
        train(demos, small_hyper(n_history=25, holdout_frac=0.0))


def test_training_divergence_detected(rng, monkeypatch):
    # The log-space loss is hard to blow up numerically, so poison it
    # directly and verify the abort path carries the batch snapshot.
    demos = demo_set(rng, count=4)
    real = LstmMdn.loss_and_grads
    calls = {"n": 0}

    def poisoned(self, params, x, y):
        calls["n"] += 1
        loss, grads = real(self, params, x, y)
        if calls["n"] == 3:
            return float("nan"), grads
        return loss, grads

    monkeypatch.setattr(LstmMdn, "loss_and_grads", poisoned)
    with pytest.raises(TrainingDiverged) as exc_info:
        train(demos, small_hyper(steps=50))
    assert exc_info.value.step == 3
    assert "window_indices" in exc_info.value.batch_info


def test_holdout_splits_by_demo(rng):
    demos = demo_set(rng, count=20)
    train_part, eval_part = split_holdout(demos, 0.1, np.random.default_rng(0))
    assert len(eval_part) == 2
    assert len(train_part) == 18
    ids = {d.id for d in train_part} | {d.id for d in eval_part}
    assert len(ids) == 20


def test_curve_csv_format(rng):
    demos = demo_set(rng, count=6)
    result = train(demos, small_hyper(steps=10, eval_every=5))
    csv = curve_to_csv(result.curve)
    lines = csv.strip().splitlines()
    assert lines[0] == "step,batch_loss,eval_loss"
    assert len(lines) == 11
    # eval column empty off-cadence, filled on cadence
    assert lines[1].endswith(",")
    assert not lines[5].endswith(",")


def test_early_stop(rng):
    demos = demo_set(rng, count=16)
    result = train(demos, small_hyper(steps=400, eval_every=10, stop_eval_ratio=0.9))
    assert result.steps_run < 400
    assert result.eval_final <= 0.9 * result.eval_initial


def test_quartile_suite_counts(rng):
    demos = []
    for i in range(16):
        demos.append(patterned_demo(rng, n=60 + 15 * i, demo_id=f"d{i}"))
    suite = train_quartile_suite(demos, small_hyper(steps=5, holdout_frac=0.0))
    assert set(suite.results) == {"q1", "q2", "q3", "q4", "all"}
    all_windows = suite.results["all"].checkpoint.log_summary["train_windows"]
    for name in ("q1", "q2", "q3", "q4"):
        assert suite.results[name].checkpoint.log_summary["train_windows"] <= all_windows
    assert suite.thresholds[0] < suite.thresholds[2]


def test_quartile_suite_skips_unusable(rng):
    # One long demo per quartile except q1 demos are too short for windows.
    demos = [patterned_demo(rng, n=9, demo_id="s1"), patterned_demo(rng, n=10, demo_id="s2")]
    demos += [patterned_demo(rng, n=200, demo_id=f"L{i}") for i in range(2)]
    hyper = small_hyper(n_history=25, steps=3, holdout_frac=0.0)
    suite = train_quartile_suite(demos, hyper)
    assert "q1" not in suite.results
    assert "all" in suite.results


# --- checkpoints -------------------------------------------------------------

def make_checkpoint(rng):
    dims = Dims(m=4, c=FEATURE_DIM, k=2, d=3, n_history=5)
    model = LstmMdn(dims)
    params = model.init_params(rng)
    stats = NormStats(rng.normal(size=FEATURE_DIM), np.abs(rng.normal(size=FEATURE_DIM)) + 0.5)
    return ckpt_mod.Checkpoint(dims, params, stats, {"k": 2}, {"steps_run": 3}, seed=11)


def test_checkpoint_roundtrip_bit_exact(tmp_path, rng):
    ck = make_checkpoint(rng)
    path = tmp_path / "model.ckpt"
    ckpt_mod.save(ck, path)
    back = ckpt_mod.load(path)
    assert back.dims == ck.dims
    assert back.seed == ck.seed
    for (na, a), (nb, b) in zip(named_arrays(ck.params), named_arrays(back.params)):
        assert na == nb
        assert np.array_equal(a, b)
    assert np.array_equal(back.norm_stats.mean, ck.norm_stats.mean)
    assert np.array_equal(back.norm_stats.std, ck.norm_stats.std)
    # save(load(x)) is byte-stable
    path2 = tmp_path / "model2.ckpt"
    ckpt_mod.save(back, path2)
    assert path.read_text() == path2.read_text()


def test_checkpoint_version_error(tmp_path, rng):
    ck = make_checkpoint(rng)
    path = tmp_path / "model.ckpt"
    ckpt_mod.save(ck, path)
    doc = path.read_text().replace('"format_version": 1', '"format_version": 9')
    path.write_text(doc)
    with pytest.raises(CheckpointVersionError):
        ckpt_mod.load(path)


def test_checkpoint_corrupt_dims(tmp_path, rng):
    ck = make_checkpoint(rng)
    path = tmp_path / "model.ckpt"
    ckpt_mod.save(ck, path)
    doc = path.read_text().replace('"m": 4', '"m": "many"')
    path.write_text(doc)
    with pytest.raises(CheckpointFormatError):
        ckpt_mod.load(path)


def test_checkpoint_dimension_mismatch(tmp_path, rng):
    ck = make_checkpoint(rng)
    path = tmp_path / "model.ckpt"
    ckpt_mod.save(ck, path)
    doc = path.read_text().replace('"m": 4', '"m": 6')
    path.write_text(doc)
    with pytest.raises(CheckpointDimensionError):
        ckpt_mod.load(path)


def test_checkpoint_truncated(tmp_path, rng):
    ck = make_checkpoint(rng)
    path = tmp_path / "model.ckpt"
    ckpt_mod.save(ck, path)
    data = path.read_text()
    path.write_text(data[: len(data) // 2])
    with pytest.raises(CheckpointFormatError):
        ckpt_mod.load(path)


def test_hyper_validation():
    with pytest.raises(ConfigError):
        Hyper(k=0).validate()
    with pytest.raises(ConfigError):
        Hyper(holdout_frac=1.0).validate()
    Hyper().validate()  # defaults are sane
