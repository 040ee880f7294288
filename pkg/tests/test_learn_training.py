import numpy as np
import pytest

from ampsure.errors import ParameterError, TrainingDivergenceError
from ampsure.learn import (LearnedShrinkage, Objective, ScalarGain, SmallResidualCNN, TrainConfig, TrainingPair,
                           TrainingSample, train)
from ampsure.learn.training import extract_patches, Adam

from _twin import twin_training


def test_scalar_gain_converges_to_wiener_scalar():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 255, (24, 24))
    z = x + 30 * rng.standard_normal(x.shape)
    c_star = np.sum(z * x) / np.sum(z * z)
    cfg = TrainConfig(epochs=200, batch_size=8, learning_rate=0.01, lr_drop_epoch=150, patch_size=24, augment=False)
    d = train(ScalarGain(), [TrainingPair(z, x, 30.0)], cfg, Objective.MSE)
    assert d.weights[0] == pytest.approx(c_star, rel=0.01)
    assert len(d.training_trace) == 200


def test_zero_epochs_returns_unchanged(rng):
    d = LearnedShrinkage(rng.uniform(0.5, 1.5, 16))
    s = [TrainingSample(rng.uniform(0, 255, (16, 16)), 10.0)]
    out = train(d, s, TrainConfig(epochs=0, patch_size=8), Objective.MCSURE)
    np.testing.assert_array_equal(out.weights, d.weights)


def test_train_is_deterministic(rng):
    s = [TrainingSample(rng.uniform(0, 255, (20, 20)), 12.0) for _ in range(3)]
    cfg = TrainConfig(epochs=3, batch_size=4, learning_rate=0.01, patch_size=10, seed=7)
    a = train(SmallResidualCNN(), s, cfg, Objective.MCSURE)
    b = train(SmallResidualCNN(), s, cfg, Objective.MCSURE)
    np.testing.assert_array_equal(a.weights, b.weights)


def test_mse_needs_clean_targets(rng):
    with pytest.raises(ParameterError):
        train(LearnedShrinkage(), [TrainingSample(np.zeros((8, 8)), 1.0)], TrainConfig(patch_size=8), Objective.MSE)


def test_sure_needs_positive_sigma():
    with pytest.raises(ParameterError):
        train(LearnedShrinkage(), [TrainingSample(np.zeros((8, 8)), 0.0)], TrainConfig(patch_size=8),
              Objective.MCSURE)


def test_empty_samples():
    with pytest.raises(ParameterError):
        train(LearnedShrinkage(), [], TrainConfig(), Objective.MCSURE)


def test_non_finite_loss_raises_with_epoch(rng):
    s = [TrainingPair(np.full((8, 8), np.inf), np.zeros((8, 8)), 1.0)]
    with pytest.raises(TrainingDivergenceError) as info:
        train(ScalarGain(), s, TrainConfig(epochs=2, patch_size=8), Objective.MSE)
    assert info.value.epoch == 0


def test_patches_preserve_sigma_and_values(rng):
    imgs = [rng.uniform(0, 255, (20, 30)), rng.uniform(0, 255, (25, 25))]
    patches, sig, clean = extract_patches(imgs, [7.5, 33.0], 10, rng=0, augment=True, clean=imgs)
    assert patches.shape[1:] == (10, 10)
    assert set(np.unique(sig)) == {7.5, 33.0}
    n_first = int(np.sum(sig == 7.5))
    assert n_first == 3 * 5  # rows {0, 5, 10}, cols {0, 5, ..., 20}
    np.testing.assert_array_equal(patches, clean)  # same transform for noisy and clean
    # no rescaling: every patch is a rotation/flip of an exact sub-window
    assert np.isclose(patches[:n_first].max(), max(p.max() for p in patches[:n_first]))
    assert set(np.round(patches[0].ravel(), 9)) <= set(np.round(imgs[0].ravel(), 9))


def test_patch_larger_than_image():
    with pytest.raises(ParameterError):
        extract_patches([np.zeros((8, 8))], [1.0], 9)


def test_lr_schedule():
    cfg = TrainConfig(learning_rate=1e-3, lr_drop_factor=0.1, lr_drop_epoch=40)
    assert cfg.lr_at(39) == 1e-3 and cfg.lr_at(40) == pytest.approx(1e-4)


def test_profiles():
    assert TrainConfig.for_profile("mri").sigma_max == 10 and TrainConfig.for_profile("mri").outer_rounds == 1
    assert TrainConfig.for_profile("gaussian").sigma_max == 55 and TrainConfig.for_profile("cdp").outer_rounds == 2


def test_config_validation():
    with pytest.raises(ParameterError):
        TrainConfig(batch_size=0)
    with pytest.raises(ParameterError):
        TrainConfig(learning_rate=-1)


def test_adam_first_step_is_lr_sized():
    w = Adam(3).step(np.zeros(3), np.array([5.0, -0.1, 0.0]), 0.1)
    np.testing.assert_allclose(w, [-0.1, 0.1, 0.0], atol=1e-6)


@pytest.fixture(scope="module")
def twin():
    return twin_training(seed=3)


def test_twin_training_psnr_gap(twin):
    _, _, p_mse, p_sure = twin
    assert abs(p_mse - p_sure) <= 0.3


@pytest.mark.xfail(reason="per-band thresholds are weakly identified: both losses are nearly flat along them (see decisions ledger)",
                   strict=False)
def test_twin_training_thresholds_close(twin):
    d_mse, d_sure, _, _ = twin
    np.testing.assert_allclose(d_sure.thresholds, d_mse.thresholds, rtol=0.05)
