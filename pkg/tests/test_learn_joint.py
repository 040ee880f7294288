import numpy as np
import pytest

from ampsure import measure_ops as mo
from ampsure.damp import DAmpConfig, DenoiserBank
from ampsure.denoise import FixedOutput, Identity
from ampsure.errors import CurationError, ParameterError
from ampsure.learn import (LearnedShrinkage, Source, TrainableDenoiser, TrainConfig, TrainingSample, curate, harvest,
                           joint_loop)
from ampsure.learn.joint import below_floor
from ampsure.synthetic import image_set


def _samples(sigmas, shape=(8, 8)):
    return [TrainingSample(np.full(shape, float(k)), s) for k, s in enumerate(sigmas)]


def test_harvest_shape_contract(images32):
    op = mo.make_gaussian_op(256, 1024, seed=0, image_shape=(32, 32))
    ys = [op.apply(x) for x in images32]
    out = harvest(op, ys, DenoiserBank(), DAmpConfig(iterations=3))
    assert len(out) == 2
    assert all(s.sigma > 0 and s.s.shape == (32, 32) for s in out)


def test_harvest_oracle_noiseless_is_below_floor(images32):
    x = images32[0]
    op = mo.make_gaussian_op(256, 1024, seed=0, image_shape=x.shape)
    out = harvest(op, [op.apply(x)], DenoiserBank(None, FixedOutput(x)), DAmpConfig(iterations=3))
    assert out[0].sigma == pytest.approx(0.0, abs=1e-9)
    assert below_floor(out[0])
    assert curate(out, 55.0) == []


def test_harvest_sigma_tracks_true_residual():
    images = image_set(4, 64, seed=17)
    op = mo.make_gaussian_op(1024, 4096, seed=2, image_shape=(64, 64))
    cfg = DAmpConfig(iterations=10)
    out = harvest(op, [op.apply(x) for x in images], DenoiserBank(), cfg)
    for s, x in zip(out, images):
        true_std = np.std(s.s - x)
        assert abs(s.sigma - true_std) <= 0.10 * true_std


class _Boom(Identity):
    def _denoise(self, x, sigma):
        return x * np.nan


def test_harvest_skips_diverged_instance(images32):
    op = mo.make_gaussian_op(256, 1024, seed=0, image_shape=(32, 32))
    ys = [op.apply(x) for x in images32]
    out = harvest(op, ys, DenoiserBank(None, _Boom()), DAmpConfig(iterations=2))
    assert out == []


def test_curate_no_outliers_is_identity():
    s = _samples([1.0, 20.0, 55.0])
    out = curate(s, 55.0)
    assert [o.sigma for o in out] == [1.0, 20.0, 55.0]
    assert all(o.source is Source.HARVESTED for o in out)
    for a, b in zip(out, s):
        np.testing.assert_array_equal(a.s, b.s)


def test_curate_all_outliers():
    s = _samples([60.0, 80.0, 100.0])
    subs = [np.full((8, 8), 100.0)]
    out = curate(s, 55.0, subs, seed=1)
    assert len(out) == 3
    assert all(o.source is Source.OUTLIER_SUBSTITUTE and 0 < o.sigma <= 55.0 for o in out)
    # substitutes carry the declared noise around the fallback image
    for o in out:
        assert abs(np.std(o.s - 100.0) - o.sigma) < 0.5 * o.sigma + 1.0


def test_curate_partition():
    sig = [10.0, 55.0, 55.0001, 70.0, 3.0]
    out = curate(_samples(sig), 55.0, [np.zeros((8, 8))])
    harvested = [o.sigma for o in out if o.source is Source.HARVESTED]
    assert harvested == [s for s in sig if s <= 55.0]
    assert sum(o.source is Source.OUTLIER_SUBSTITUTE for o in out) == 2


def test_curate_outliers_without_substitutes():
    with pytest.raises(CurationError):
        curate(_samples([10.0, 90.0]), 55.0, [])


def test_joint_loop_smoke(images32):
    op = mo.make_gaussian_op(256, 1024, seed=1, image_shape=(32, 32))
    ys = [op.apply(x) for x in images32]
    cfg = TrainConfig(epochs=2, batch_size=16, learning_rate=0.01, patch_size=16, outer_rounds=1)
    rec, trained, report = joint_loop(ys, op, LearnedShrinkage(), cfg, DAmpConfig(iterations=3), x_true=images32)
    assert len(rec) == 2 and all(r.shape == (32, 32) for r in rec)
    assert trained.weights.shape == (16,)
    assert len(report.round_sigma) == 1 and len(report.round_psnr) == 1
    assert report.initial_psnr is not None


def test_joint_loop_needs_measurements():
    with pytest.raises(ParameterError):
        joint_loop([], None, LearnedShrinkage(), TrainConfig())


class _TrainableOracle(TrainableDenoiser):
    """Outputs a fixed image whatever the input; one inert weight."""

    arch = "oracle"
    n_weights = 1
    target = None

    def default_weights(self):
        return np.zeros(1)

    def forward(self, x, sigma):
        return np.broadcast_to(self.target, x.shape).copy(), None

    def backward(self, cache, cotangent):
        return np.zeros(1)


def test_joint_loop_with_oracle_stays_exact(images32):
    x = images32[0]
    _TrainableOracle.target = x
    op = mo.make_gaussian_op(256, 1024, seed=1, image_shape=x.shape)
    cfg = TrainConfig(epochs=2, patch_size=16, outer_rounds=2)
    rec, trained, report = joint_loop([op.apply(x)], op, _TrainableOracle(), cfg, DAmpConfig(iterations=3),
                                      fallback=FixedOutput(x), x_true=[x])
    np.testing.assert_array_equal(rec[0], x)
    np.testing.assert_array_equal(trained.weights, [0.0])
    assert report.round_psnr == [100.0, 100.0]
    assert report.round_trained == [False, False]
