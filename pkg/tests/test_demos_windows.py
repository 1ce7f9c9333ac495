import math

import numpy as np
import pytest

from pressfit.errors import DataError
from pressfit.features import (
    FEATURE_DIM,
    WRENCH_START,
    NormStats,
    demo_features,
    feature_vector,
    fit_norm_stats,
)
from pressfit.geometry import Pose, Twist, Wrench
from pressfit.windows import WindowSampler, make_windows, window_count

from test_recording import make_demo


def test_feature_vector_layout():
    v = feature_vector(Pose(0.01, 0.02, 0.5), Twist(1, 2, 3), Wrench(4, 5, 6))
    assert v.shape == (FEATURE_DIM,)
    assert v[0] == 0.01 and v[1] == 0.02
    assert v[2] == pytest.approx(math.sin(0.5))
    assert v[3] == pytest.approx(math.cos(0.5))
    assert list(v[4:7]) == [1, 2, 3]
    assert list(v[WRENCH_START:]) == [4, 5, 6]


def test_goal_shift_identity_between_frames():
    pose = Pose(0.004, 0.01, 0.2)
    shift = (0.001, -0.002, 0.05)
    v = feature_vector(pose, Twist(0, 0, 0), Wrench(0, 0, 0), shift)
    # Shifted frame: rotate the offset position by -shift angle.
    dx, dz = pose.x - shift[0], pose.z - shift[1]
    c, s = math.cos(-shift[2]), math.sin(-shift[2])
    assert v[0] == pytest.approx(c * dx - s * dz)
    assert v[1] == pytest.approx(s * dx + c * dz)
    assert v[2] == pytest.approx(math.sin(pose.theta - shift[2]))


def test_norm_stats_known_values():
    xs = [np.tile(np.arange(FEATURE_DIM, dtype=float), (4, 1))]
    xs[0][:, 0] = [1.0, 3.0, 7.0, 9.0]  # mean 5, std 2*sqrt(2)... use direct
    stats = fit_norm_stats(xs)
    assert stats.mean[0] == pytest.approx(5.0)
    # Constant features get std forced to 1 and normalize to 0.
    assert stats.std[1] == 1.0
    normed = stats.apply(xs[0])
    assert np.allclose(normed[:, 1], 0.0)


def test_norm_stats_feature_mean5_std2():
    col = np.array([5.0 - 2.0, 5.0 + 2.0, 5.0 - 2.0, 5.0 + 2.0])
    xs = np.zeros((4, FEATURE_DIM))
    xs[:, 3] = col
    stats = fit_norm_stats([xs])
    assert stats.mean[3] == pytest.approx(5.0)
    assert stats.std[3] == pytest.approx(2.0)
    x = np.zeros(FEATURE_DIM)
    x[3] = 9.0
    assert stats.apply(x)[3] == pytest.approx(2.0)


def test_norm_roundtrip_tight(rng):
    xs = [rng.normal(size=(50, FEATURE_DIM)) * 3.0 + 1.0]
    stats = fit_norm_stats(xs)
    x = rng.normal(size=(7, FEATURE_DIM))
    back = stats.invert(stats.apply(x))
    assert np.max(np.abs(back - x)) < 1e-12
    y = rng.normal(size=(7, 3))
    back_y = stats.invert_wrench(stats.apply_wrench(y))
    assert np.max(np.abs(back_y - y)) < 1e-12


def test_fit_norm_stats_empty_raises():
    with pytest.raises(DataError):
        fit_norm_stats([])


def test_window_counts(rng):
    # len = n+2 yields exactly one window; each extra sample adds one,
    # so the count is max(0, len - (n+1)) at stride 1.
    demo = make_demo(rng, n=27)
    assert len(make_windows(demo, 25)) == 1
    demo = make_demo(rng, n=30)
    assert len(make_windows(demo, 25)) == 30 - 26
    assert window_count(30, 25) == 4
    assert window_count(26, 25) == 0
    demo_short = make_demo(rng, n=20)
    assert make_windows(demo_short, 25) == []


def test_window_label_is_next_wrench(rng):
    demo = make_demo(rng, n=40)
    n = 10
    wins = make_windows(demo, n, stride=1)
    assert len(wins) == 40 - n - 1
    for k, w in enumerate(wins):
        pivot = n + k
        nxt = demo.samples[pivot + 1].wrench
        assert list(w.label) == [nxt.fx, nxt.fz, nxt.tau]
        assert w.inputs.shape == (n + 1, FEATURE_DIM)
        # window spans n+2 samples of the demo
        first = demo.samples[pivot - n]
        assert w.inputs[0, 0] == first.pose.x


def test_window_stride(rng):
    demo = make_demo(rng, n=40)
    wins = make_windows(demo, 10, stride=5)
    assert len(wins) == math.ceil((40 - 11) / 5)


def test_sampler_matches_make_windows(rng):
    demos = [make_demo(rng, n=30, demo_id="a"), make_demo(rng, n=45, demo_id="b")]
    n = 7
    sampler = WindowSampler(demos, n)
    expected = [w for d in demos for w in make_windows(d, n)]
    assert sampler.total == len(expected)
    xs, ys = sampler.enumerate_all()
    for i, w in enumerate(expected):
        assert np.array_equal(xs[i], w.inputs)
        assert np.array_equal(ys[i], w.label)


def test_sampler_batch_deterministic(rng):
    demos = [make_demo(rng, n=60)]
    sampler = WindowSampler(demos, 5)
    xs1, ys1, idx1 = sampler.sample_batch(np.random.default_rng(3), 16)
    xs2, ys2, idx2 = sampler.sample_batch(np.random.default_rng(3), 16)
    assert np.array_equal(xs1, xs2)
    assert np.array_equal(idx1, idx2)


def test_demo_features_shape(rng):
    demo = make_demo(rng, n=12)
    feats = demo_features(demo)
    assert feats.shape == (12, FEATURE_DIM)
