"""Supervised (MSE) and unsupervised (Monte-Carlo SURE) denoising losses.

For a noisy image ``z = x + n`` with ``n ~ N(0, sigma^2 I)`` the per-image MC-SURE
value is::

    ||z - D(z)||^2 - N sigma^2 + (2 sigma^2 / eps) * p' (D(z + eps p) - D(z))

whose expectation equals ``E ||D(z) - x||^2`` up to the Monte-Carlo divergence
error. Both losses are per-image sums averaged over the batch.
"""

from dataclasses import dataclass

import numpy as np

from .denoise import DenoiserInput, DivergenceProbe
from .errors import DegenerateSigmaError, ParameterError, ShapeError

__all__ = [
    "SureLossValue",
    "UnbiasednessReport",
    "mse_loss",
    "sure_loss",
    "make_probes",
    "unbiasedness_report",
]

EPSILON_FACTOR = 1e-3


@dataclass(frozen=True)
class SureLossValue:
    total: float
    fidelity: float
    penalty: float
    divergence_term: float
    n: int
    sigma: float


@dataclass(frozen=True)
class UnbiasednessReport:
    mean_sure: float
    mean_mse: float
    rel_gap: float
    std_sure: float
    trials: int
    gap_defined: bool = True


def _sigmas(sigma, count):
    s = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (count,))
    return [float(v) for v in s]


def mse_loss(d, pairs, sigma):
    """Mean over pairs of ``||D(noisy) - clean||^2``.

    ``sigma`` is passed to the denoiser, either one value or one per pair.
    """
    pairs = list(pairs)
    if not pairs:
        raise ParameterError("mse_loss needs at least one pair")
    total = 0.0
    for (noisy, clean), s in zip(pairs, _sigmas(sigma, len(pairs))):
        noisy = np.asarray(noisy, dtype=np.float64)
        clean = np.asarray(clean, dtype=np.float64)
        if noisy.shape != clean.shape:
            raise ShapeError(f"noisy {noisy.shape} and clean {clean.shape} differ")
        total += float(np.sum((d(noisy, s) - clean) ** 2))
    return total / len(pairs)


def make_probes(batch, seed, epsilon_factor=EPSILON_FACTOR):
    """One probe per input with ``epsilon = epsilon_factor * sigma``."""
    seeds = np.random.SeedSequence(seed).generate_state(len(batch), dtype=np.uint64)
    return [DivergenceProbe(epsilon_factor * inp.sigma, int(s)) for inp, s in zip(batch, seeds)]


def _as_probe_list(p):
    return list(p) if isinstance(p, (list, tuple)) else [p]


def sure_loss(d, batch, probes, exact_divergence=False):
    """Batch-mean MC-SURE with its three components.

    ``probes[j]`` is a :class:`DivergenceProbe` or a list of them; a list is
    averaged. ``exact_divergence=True`` substitutes ``d.divergence`` for the
    Monte-Carlo term (analytic denoisers only) and ignores ``probes``.
    """
    batch = [b if isinstance(b, DenoiserInput) else DenoiserInput(*b) for b in batch]
    if not batch:
        raise ParameterError("sure_loss needs a nonempty batch")
    if not exact_divergence and len(probes) != len(batch):
        raise ShapeError(f"{len(batch)} inputs but {len(probes)} probes")

    fid = pen = div_term = 0.0
    for j, inp in enumerate(batch):
        s = inp.sigma
        if s <= 0:
            raise DegenerateSigmaError("SURE is undefined for sigma = 0")
        z = np.asarray(inp.image, dtype=np.float64)
        out = d(z, s)
        fid += float(np.sum((z - out) ** 2))
        pen -= z.size * s * s
        if exact_divergence:
            div = float(d.divergence(z, s))
        else:
            ests = []
            for p in _as_probe_list(probes[j]):
                v = p.vector(z.shape)
                ests.append(float(np.vdot(v, d(z + p.epsilon * v, s) - out)) / p.epsilon)
            div = float(np.mean(ests))
        div_term += 2.0 * s * s * div

    k = len(batch)
    sig = batch[0].sigma if all(b.sigma == batch[0].sigma for b in batch) else float("nan")
    return SureLossValue(
        total=(fid + pen + div_term) / k,
        fidelity=fid / k,
        penalty=pen / k,
        divergence_term=div_term / k,
        n=int(np.size(batch[0].image)),
        sigma=sig,
    )


def unbiasedness_report(d, x_hidden, sigma, trials, seed, epsilon_factor=EPSILON_FACTOR):
    """Compare mean MC-SURE with the mean true squared error over noise draws."""
    if trials < 2:
        raise ParameterError("need at least two trials")
    if sigma <= 0:
        raise DegenerateSigmaError("SURE is undefined for sigma = 0")
    x = np.asarray(x_hidden, dtype=np.float64)
    rng = np.random.default_rng(seed)
    sure_vals = np.empty(trials)
    mse_vals = np.empty(trials)
    eps = epsilon_factor * sigma
    for i in range(trials):
        z = x + sigma * rng.standard_normal(x.shape)
        probe = rng.standard_normal(x.shape)
        out = d(z, sigma)
        div = float(np.vdot(probe, d(z + eps * probe, sigma) - out)) / eps
        sure_vals[i] = np.sum((z - out) ** 2) - z.size * sigma**2 + 2 * sigma**2 * div
        mse_vals[i] = np.sum((out - x) ** 2)
    mean_sure = float(sure_vals.mean())
    mean_mse = float(mse_vals.mean())
    if mean_mse == 0:
        gap, defined = float("nan"), False
    else:
        gap, defined = abs(mean_sure - mean_mse) / mean_mse, True
    return UnbiasednessReport(mean_sure, mean_mse, gap, float(sure_vals.std(ddof=1)),
                              trials, defined)
