"""Patch-based training of trainable denoisers with MSE or MC-SURE."""

import enum
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, TrainingDivergenceError
from .grads import mse_value_and_grad, sure_value_and_grad

__all__ = [
    "Objective",
    "Source",
    "TrainConfig",
    "TrainingSample",
    "TrainingPair",
    "Adam",
    "extract_patches",
    "train",
]

log = logging.getLogger(__name__)


class Objective(enum.Enum):
    MSE = "mse"
    MCSURE = "sure"


class Source(enum.Enum):
    HARVESTED = "harvested"
    OUTLIER_SUBSTITUTE = "substitute"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class TrainingSample:
    """A noisy image with its (estimated) noise standard deviation."""

    s: np.ndarray
    sigma: float
    source: Source = Source.HARVESTED


@dataclass(frozen=True)
class TrainingPair:
    noisy: np.ndarray
    clean: np.ndarray
    sigma: float


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 128
    learning_rate: float = 1e-3
    lr_drop_factor: float = 0.1
    lr_drop_epoch: int = 40
    patch_size: int = 50
    patch_stride: int = None
    sigma_max: float = 55.0
    outer_rounds: int = 2
    epsilon_factor: float = 1e-2
    augment: bool = True
    seed: int = 0

    def __post_init__(self):
        for name in ("batch_size", "patch_size", "outer_rounds"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be positive")
        if self.epochs < 0:
            raise ParameterError("epochs must be nonnegative")
        if not self.learning_rate > 0 or not self.epsilon_factor > 0 or not self.sigma_max > 0:
            raise ParameterError("learning_rate, epsilon_factor and sigma_max must be positive")

    @classmethod
    def for_profile(cls, profile, **overrides):
        base = {"mri": dict(sigma_max=10.0, outer_rounds=1)}.get(profile, {})
        return cls(**{**base, **overrides})

    def lr_at(self, epoch):
        if self.lr_drop_epoch is not None and epoch >= self.lr_drop_epoch:
            return self.learning_rate * self.lr_drop_factor
        return self.learning_rate


class Adam:
    def __init__(self, size, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def step(self, w, grad, lr):
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return w - lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _dihedral(a, code):
    a = np.rot90(a, code % 4)
    return a[:, ::-1] if code >= 4 else a


def extract_patches(images, sigmas, patch_size, stride=None, rng=None, augment=True, clean=None):
    """Cut square patches on a regular grid; each inherits its image's sigma.

    Patches are never rescaled. With ``augment`` every patch gets one random
    rotation/flip, applied identically to the matching clean patch.
    """
    stride = stride or max(patch_size // 2, 1)
    rng = np.random.default_rng(rng)
    out, out_sigma, out_clean = [], [], []
    for j, img in enumerate(images):
        img = np.asarray(img, dtype=np.float64)
        h, w = img.shape
        if patch_size > h or patch_size > w:
            raise ParameterError(f"patch size {patch_size} exceeds image {h}x{w}")
        rows = list(range(0, h - patch_size + 1, stride))
        cols = list(range(0, w - patch_size + 1, stride))
        if rows[-1] != h - patch_size:
            rows.append(h - patch_size)
        if cols[-1] != w - patch_size:
            cols.append(w - patch_size)
        for r in rows:
            for c in cols:
                code = int(rng.integers(8)) if augment else 0
                out.append(_dihedral(img[r:r + patch_size, c:c + patch_size], code))
                out_sigma.append(float(sigmas[j]))
                if clean is not None:
                    ref = np.asarray(clean[j], dtype=np.float64)
                    out_clean.append(_dihedral(ref[r:r + patch_size, c:c + patch_size], code))
    patches = np.ascontiguousarray(np.stack(out))
    cleans = np.ascontiguousarray(np.stack(out_clean)) if clean is not None else None
    return patches, np.array(out_sigma), cleans


def train(d, samples, cfg, objective):
    """Fit ``d`` by Adam on patches of ``samples``; returns a new denoiser.

    ``samples`` are :class:`TrainingSample` for MC-SURE or :class:`TrainingPair`
    for MSE. The returned denoiser carries the per-epoch mean loss in
    ``training_trace``. Probes for MC-SURE are redrawn every epoch.
    """
    objective = Objective(objective)
    samples = list(samples)
    if not samples:
        raise ParameterError("no training samples")
    if cfg.epochs == 0:
        return d

    if objective == Objective.MSE:
        if not all(isinstance(s, TrainingPair) for s in samples):
            raise ParameterError("MSE training needs TrainingPair samples with clean targets")
        images = [s.noisy for s in samples]
        clean = [s.clean for s in samples]
    else:
        images = [s.s if isinstance(s, TrainingSample) else s.noisy for s in samples]
        clean = None
    sigmas = [s.sigma for s in samples]
    if objective == Objective.MCSURE and min(sigmas) <= 0:
        raise ParameterError("MC-SURE training needs positive sigma for every sample")

    rng = np.random.default_rng(cfg.seed)
    patches, patch_sigma, patch_clean = extract_patches(
        images, sigmas, cfg.patch_size, cfg.patch_stride, rng, cfg.augment, clean)
    count = len(patches)

    w = d.weights.copy()
    opt = Adam(w.size)
    trace = []
    for epoch in range(cfg.epochs):
        ep_rng = np.random.default_rng([cfg.seed, epoch])
        order = ep_rng.permutation(count)
        probes = ep_rng.standard_normal(patches.shape) if objective == Objective.MCSURE else None
        lr = cfg.lr_at(epoch)
        total = 0.0
        model = d.with_weights(w)
        for start in range(0, count, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            if objective == Objective.MSE:
                loss, grad = mse_value_and_grad(model, patches[idx], patch_clean[idx], patch_sigma[idx])
            else:
                loss, grad = sure_value_and_grad(model, patches[idx], patch_sigma[idx],
                                                 cfg.epsilon_factor * patch_sigma[idx], probes[idx])
            if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
                raise TrainingDivergenceError(epoch)
            total += loss * len(idx)
            w = opt.step(w, grad, lr)
            model = d.with_weights(w)
        trace.append(total / count)
        log.debug("epoch %d  lr %.2g  loss %.6g", epoch, lr, trace[-1])
    return d.with_weights(w, training_trace=d.training_trace + tuple(trace))


