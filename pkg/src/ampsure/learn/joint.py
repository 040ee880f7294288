"""Joint recovery and unsupervised denoiser learning from measurements alone.

Each outer round runs D-AMP on every measurement with the current denoiser,
collects the final pseudo-clean images ``x_T + Re A^H z_T`` with their
image-domain noise estimates, replaces samples that are too noisy, and refits
the denoiser on them with MC-SURE (warm start).
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..damp import DAmpConfig, DenoiserBank, damp_run, estimate_sigma_image
from ..denoise import HardThresholdDCT
from ..errors import CurationError, DivergenceError, ParameterError
from .training import Objective, Source, TrainingPair, TrainingSample, train

__all__ = [
    "harvest",
    "curate",
    "pretrain",
    "joint_loop",
    "JointReport",
    "worker_count",
]

log = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-3


def worker_count():
    """Thread count from ``AMPSURE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("AMPSURE_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items, workers=None):
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _psnr(a, b):
    mse = float(np.mean((np.asarray(a) - np.asarray(b)) ** 2))
    return 100.0 if mse == 0 else 10.0 * np.log10(255.0**2 / mse)


def run_all(op, measurements, bank, damp_cfg, x_true=None):
    """D-AMP on every measurement, returning ``(result, seconds)`` pairs.

    Instance ``k`` uses probe seed ``damp_cfg.probe_seed + k``. A diverged
    instance yields ``(None, seconds)`` and is logged.
    """

    def one(k):
        cfg = replace(damp_cfg, probe_seed=damp_cfg.probe_seed + k)
        truth = None if x_true is None else x_true[k]
        t0 = time.perf_counter()
        try:
            res = damp_run(op, measurements[k], bank, cfg, x_true=truth)
        except DivergenceError as exc:
            log.warning("measurement %d skipped: %s", k, exc)
            res = None
        return res, time.perf_counter() - t0

    return _map(one, list(range(len(measurements))))


def _runs(op, measurements, bank, damp_cfg, x_true=None):
    return [r for r, _ in run_all(op, measurements, bank, damp_cfg, x_true)]


def _sample(op, result):
    state = result.state
    sigma = estimate_sigma_image(op, state.z)
    return TrainingSample(state.pseudo_clean.reshape(op.image_shape).copy(), sigma)


def harvest(op, measurements, bank, damp_cfg):
    """Pseudo-clean images and image-domain noise estimates from D-AMP runs.

    Diverged instances are skipped. Samples whose estimate falls below
    ``SIGMA_FLOOR`` are kept; :func:`curate` drops them.
    """
    results = _runs(op, measurements, bank, damp_cfg)
    return [_sample(op, r) for r in results if r is not None]


def below_floor(sample):
    return sample.sigma < SIGMA_FLOOR


def curate(samples, sigma_max, substitutes=(), seed=0):
    """Keep samples with ``sigma <= sigma_max`` and swap out the rest.

    The i-th outlier is replaced by ``substitutes[i % len(substitutes)]`` plus
    Gaussian noise with sigma drawn uniformly from (0, sigma_max]. Samples
    below the noise floor carry nothing to learn from and are dropped.
    """
    rng = np.random.default_rng(seed)
    substitutes = list(substitutes)
    out = []
    n_out = 0
    for s in samples:
        if below_floor(s):
            continue
        if s.sigma <= sigma_max:
            out.append(TrainingSample(s.s, s.sigma, Source.HARVESTED))
            continue
        if not substitutes:
            raise CurationError(
                f"sample with sigma {s.sigma:.3g} exceeds {sigma_max} and no substitutes were given")
        base = np.asarray(substitutes[n_out % len(substitutes)], dtype=np.float64)
        sigma = float(sigma_max * (1.0 - rng.random()))
        noisy = base + sigma * rng.standard_normal(base.shape)
        out.append(TrainingSample(noisy, sigma, Source.OUTLIER_SUBSTITUTE))
        n_out += 1
    return out


def pretrain(d, images, cfg, seed=0):
    """MSE fit on ``images`` plus synthetic noise with sigma uniform in (0, sigma_max].

    ``images`` are typically fallback-D-AMP recoveries standing in for clean data.
    """
    rng = np.random.default_rng(seed)
    pairs = []
    for img in images:
        img = np.asarray(img, dtype=np.float64)
        sigma = float(cfg.sigma_max * (1.0 - rng.random()))
        pairs.append(TrainingPair(img + sigma * rng.standard_normal(img.shape), img, sigma))
    return train(d, pairs, cfg, Objective.MSE)


@dataclass
class JointReport:
    """Per-round summary of :func:`joint_loop`.

    ``initial_*`` describe recovery with the initial denoiser. Entry ``l`` of
    the ``round_*`` lists describes round ``l + 1``: the mean noise estimate of
    the samples it trained on, how many were substituted, and the mean PSNR of
    the recovery made with the weights it produced.
    """

    initial_psnr: float = None
    initial_results: list = field(default_factory=list)
    initial_runtimes: list = field(default_factory=list)
    round_sigma: list = field(default_factory=list)
    round_psnr: list = field(default_factory=list)
    round_substitutes: list = field(default_factory=list)
    round_trained: list = field(default_factory=list)
    results: list = field(default_factory=list)
    runtimes: list = field(default_factory=list)


def _mean_psnr(results, x_true):
    vals = [_psnr(r.image, x_true[k]) for k, r in enumerate(results) if r is not None]
    return float(np.mean(vals)) if vals else float("nan")


def joint_loop(measurements, op, init_denoiser, cfg, damp_cfg=None, fallback=None, x_true=None,
               fallback_images=None):
    """Alternate D-AMP recovery and MC-SURE refitting for ``cfg.outer_rounds`` rounds.

    Every measurement is first recovered with ``init_denoiser``. Each round
    then harvests the latest recoveries, curates them, refits the denoiser
    (warm start) and recovers again with the new weights. Returns
    ``(recovered, trained, report)``; ``recovered`` holds the last round's
    images (``None`` for a diverged instance). ``x_true`` only feeds the
    report's PSNR and true-noise entries. ``fallback_images`` may supply
    fallback-only recoveries used as outlier substitutes; missing ones are
    computed on demand.
    """
    measurements = list(measurements)
    if not measurements:
        raise ParameterError("joint_loop needs at least one measurement")
    damp_cfg = damp_cfg or DAmpConfig()
    fallback = fallback or HardThresholdDCT()
    report = JointReport()
    fallback_cache = {}
    if fallback_images is not None:
        fallback_cache = {k: img for k, img in enumerate(fallback_images) if img is not None}

    d = init_denoiser
    timed = run_all(op, measurements, DenoiserBank(blind=d, fallback=fallback), damp_cfg, x_true)
    results = [r for r, _ in timed]
    report.initial_results = report.results = results
    report.initial_runtimes = report.runtimes = [t for _, t in timed]
    if x_true is not None:
        report.initial_psnr = _mean_psnr(results, x_true)

    for rnd in range(cfg.outer_rounds):
        kept = [k for k, r in enumerate(results) if r is not None]
        if not kept:
            raise CurationError(f"round {rnd + 1}: every D-AMP run diverged")
        samples = [_sample(op, results[k]) for k in kept]

        outliers = [k for k, s in zip(kept, samples) if s.sigma > cfg.sigma_max]
        missing = [k for k in outliers if k not in fallback_cache]
        if missing:
            fb = _runs(op, [measurements[k] for k in missing], DenoiserBank(None, fallback), damp_cfg)
            for k, r in zip(missing, fb):
                fallback_cache[k] = r.image if r is not None else results[k].state.x.reshape(op.image_shape)
        curated = curate(samples, cfg.sigma_max, [fallback_cache[k] for k in outliers],
                         seed=cfg.seed + rnd)
        report.round_sigma.append(float(np.mean([s.sigma for s in samples])))
        report.round_substitutes.append(len(outliers))

        if curated:
            d = train(d, curated, replace(cfg, seed=cfg.seed + rnd), Objective.MCSURE)
            report.round_trained.append(True)
        else:
            log.info("round %d: all pseudo-clean images below the noise floor; weights unchanged", rnd + 1)
            report.round_trained.append(False)

        timed = run_all(op, measurements, DenoiserBank(blind=d, fallback=fallback), damp_cfg, x_true)
        results = [r for r, _ in timed]
        report.results = results
        report.runtimes = [t for _, t in timed]
        if x_true is not None:
            report.round_psnr.append(_mean_psnr(results, x_true))
        log.info("round %d: mean sigma %.3f, %d substitutes", rnd + 1,
                 report.round_sigma[-1], len(outliers))

    recovered = [None if r is None else r.image for r in results]
    return recovered, d, report
