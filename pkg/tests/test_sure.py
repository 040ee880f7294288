import numpy as np
import pytest

from ampsure.denoise import DenoiserInput, DivergenceProbe, FixedOutput, Identity, Scale, SoftThresholdDCT
from ampsure.errors import DegenerateSigmaError, ShapeError
from ampsure.sure import make_probes, mse_loss, sure_loss, unbiasedness_report


def test_mse_identity_zero(rng):
    x = rng.standard_normal(5)
    assert mse_loss(Identity(), [(x, x)], 1.0) == 0.0


def test_mse_zero_denoiser():
    assert mse_loss(FixedOutput(0.0), [(np.array([1.0, 1.0]), np.array([3.0, 4.0]))], 1.0) == 25.0


def test_mse_shape_mismatch():
    with pytest.raises(ShapeError):
        mse_loss(Identity(), [(np.zeros(3), np.zeros(4))], 1.0)


def test_mse_minimizer_is_wiener_scalar():
    rng = np.random.default_rng(0)
    K, N, sigma = 400, 64, 20.0
    clean = [rng.uniform(0, 60, N) for _ in range(K)]
    noise = [sigma * rng.standard_normal(N) for _ in range(K)]
    pairs = [(c + e, c) for c, e in zip(clean, noise)]
    energy = sum(np.sum(c * c) for c in clean)
    c_star = energy / (energy + N * sigma**2 * K)
    grid = np.linspace(c_star - 0.1, c_star + 0.1, 401)
    best = grid[np.argmin([mse_loss(Scale(c), pairs, sigma) for c in grid])]
    assert best == pytest.approx(c_star, rel=0.02)


def test_sure_identity_components(rng):
    z = rng.standard_normal(100)
    probe = DivergenceProbe(0.01, seed=4)
    n = probe.vector(z.shape)
    v = sure_loss(Identity(), [DenoiserInput(z, 10.0)], [probe])
    assert v.fidelity == 0.0
    assert v.total == pytest.approx(-100 * 100 + 2 * 100 * np.sum(n * n), rel=1e-9)
    exact = sure_loss(Identity(), [DenoiserInput(z, 10.0)], None, exact_divergence=True)
    assert exact.total == pytest.approx(10000.0, rel=1e-12)


def test_sure_zero_denoiser(rng):
    z = rng.standard_normal(50) * 3
    v = sure_loss(FixedOutput(0.0), [DenoiserInput(z, 2.0)], [DivergenceProbe(0.1, 0)])
    assert v.total == pytest.approx(np.sum(z * z) - 50 * 4.0)


def test_sure_decomposition(rng):
    batch = [DenoiserInput(rng.uniform(0, 255, (8, 8)), s) for s in (5.0, 9.0)]
    v = sure_loss(SoftThresholdDCT(), batch, make_probes(batch, seed=1))
    assert v.total == pytest.approx(v.fidelity + v.penalty + v.divergence_term, rel=1e-9)
    assert np.isnan(v.sigma)


def test_sure_degenerate_sigma():
    with pytest.raises(DegenerateSigmaError):
        sure_loss(Identity(), [DenoiserInput(np.zeros(4), 0.0)], [DivergenceProbe(0.1, 0)])


def test_sure_probe_count_mismatch():
    with pytest.raises(ShapeError):
        sure_loss(Identity(), [DenoiserInput(np.zeros(4), 1.0)], [])


def test_sure_scale_matches_mse_over_realizations():
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 255, 1024)
    sigma = 20.0
    d = Scale(0.5)
    sures, mses = [], []
    for i in range(2000):
        z = x + sigma * rng.standard_normal(x.shape)
        sures.append(sure_loss(d, [DenoiserInput(z, sigma)], [DivergenceProbe(1e-3 * sigma, i)]).total)
        mses.append(np.sum((d(z, sigma) - x) ** 2))
    assert np.mean(sures) == pytest.approx(np.mean(mses), rel=0.015)


def test_sure_probe_list_is_averaged(rng):
    z = rng.standard_normal(16)
    probes = [DivergenceProbe(0.1, s) for s in range(3)]
    each = [sure_loss(Identity(), [DenoiserInput(z, 1.0)], [p]).total for p in probes]
    avg = sure_loss(Identity(), [DenoiserInput(z, 1.0)], [probes]).total
    assert avg == pytest.approx(np.mean(each))


def test_sure_scaling_covariance(rng):
    z = rng.uniform(0, 255, (8, 8))
    s = 3.0
    p = DivergenceProbe(0.05, 2)
    a = sure_loss(Scale(0.4), [DenoiserInput(z, 7.0)], [p])
    b = sure_loss(Scale(0.4), [DenoiserInput(s * z, s * 7.0)], [DivergenceProbe(s * 0.05, 2)])
    for f in ("total", "fidelity", "penalty", "divergence_term"):
        assert getattr(b, f) == pytest.approx(s * s * getattr(a, f), rel=1e-9)


@pytest.mark.parametrize("d", [Identity(), Scale(0.5)])
def test_unbiasedness_report(d):
    x = np.random.default_rng(0).uniform(0, 255, (64, 64))
    rep = unbiasedness_report(d, x, 15.0, trials=2000, seed=1)
    assert rep.gap_defined and rep.rel_gap <= 0.02
    if isinstance(d, Identity):
        assert rep.mean_mse == pytest.approx(4096 * 225.0, rel=0.01)


def test_unbiasedness_two_trials():
    rep = unbiasedness_report(Scale(0.5), np.ones((4, 4)), 1.0, trials=2, seed=0)
    assert rep.trials == 2 and np.isfinite(rep.std_sure)


def test_unbiasedness_perfect_denoiser_flags_gap():
    x = np.ones((4, 4))
    rep = unbiasedness_report(FixedOutput(x), x, 1.0, trials=3, seed=0)
    assert not rep.gap_defined


def test_probe_seeds_independent_sets_agree():
    x = np.random.default_rng(0).uniform(0, 255, (32, 32))
    rng = np.random.default_rng(9)
    batch = [DenoiserInput(x + 10 * rng.standard_normal(x.shape), 10.0) for _ in range(300)]
    d = SoftThresholdDCT()
    a = [sure_loss(d, [b], [p]).total for b, p in zip(batch, make_probes(batch, 1))]
    b = [sure_loss(d, [b], [p]).total for b, p in zip(batch, make_probes(batch, 2))]
    tol = 2 * (np.std(a) / np.sqrt(len(a))) * 3
    assert abs(np.mean(a) - np.mean(b)) <= tol
