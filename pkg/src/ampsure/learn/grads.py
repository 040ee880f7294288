"""Loss values and exact weight gradients for trainable denoisers."""

from collections import defaultdict

import numpy as np

from ..denoise import DenoiserInput
from ..errors import DegenerateSigmaError, ParameterError, ShapeError

__all__ = ["grad_mse", "grad_sure", "mse_value_and_grad", "sure_value_and_grad"]


def _by_shape(items):
    groups = defaultdict(list)
    for j, item in enumerate(items):
        groups[np.shape(item)].append(j)
    return groups.values()


def mse_value_and_grad(d, noisy, clean, sigma):
    """Batch-mean of per-image squared error and its gradient.

    ``noisy`` and ``clean`` are stacks ``(B, H, W)``, ``sigma`` has shape ``(B,)``.
    """
    out, cache = d.forward(noisy, sigma)
    diff = out - clean
    k = len(noisy)
    loss = float(np.sum(diff**2)) / k
    return loss, d.backward(cache, 2.0 * diff / k)


def sure_value_and_grad(d, noisy, sigma, eps, probes, scale=None):
    """Batch-mean MC-SURE and its gradient, differentiating both denoiser calls.

    ``probes`` is a ``(B, H, W)`` stack of standard-normal vectors and ``eps``
    holds one perturbation size per image.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if np.any(sigma <= 0):
        raise DegenerateSigmaError("SURE is undefined for sigma = 0")
    k = len(noisy) if scale is None else scale
    n = noisy[0].size
    s2 = (sigma**2)[:, None, None]
    e = eps[:, None, None]

    out, cache = d.forward(noisy, sigma)
    moved, cache_moved = d.forward(noisy + e * probes, sigma)
    resid = noisy - out
    div = np.sum(probes * (moved - out), axis=(1, 2)) / eps
    per_image = np.sum(resid**2, axis=(1, 2)) - n * sigma**2 + 2.0 * sigma**2 * div
    loss = float(np.sum(per_image)) / k

    weight = 2.0 * s2 / e * probes
    grad = d.backward(cache, (-2.0 * resid - weight) / k)
    grad = grad + d.backward(cache_moved, weight / k)
    return loss, grad


def grad_mse(d, pairs, sigma):
    """Gradient of :func:`ampsure.sure.mse_loss` with respect to ``d.weights``."""
    pairs = list(pairs)
    if not pairs:
        raise ParameterError("empty batch")
    sig = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (len(pairs),))
    grad = np.zeros(d.weights.size)
    for idx in _by_shape([np.asarray(p[0]) for p in pairs]):
        noisy = np.stack([np.asarray(pairs[j][0], dtype=np.float64) for j in idx])
        clean = np.stack([np.asarray(pairs[j][1], dtype=np.float64) for j in idx])
        if noisy.shape != clean.shape:
            raise ShapeError("noisy and clean images differ in shape")
        _, g = mse_value_and_grad(d, noisy, clean, sig[idx])
        grad += g * len(idx) / len(pairs)
    return grad


def grad_sure(d, batch, probes):
    """Gradient of :func:`ampsure.sure.sure_loss` (total) for fixed probes."""
    batch = [b if isinstance(b, DenoiserInput) else DenoiserInput(*b) for b in batch]
    if not batch:
        raise ParameterError("empty batch")
    if len(probes) != len(batch):
        raise ShapeError(f"{len(batch)} inputs but {len(probes)} probes")
    grad = np.zeros(d.weights.size)
    for idx in _by_shape([np.asarray(b.image) for b in batch]):
        noisy = np.stack([np.asarray(batch[j].image, dtype=np.float64) for j in idx])
        sigma = np.array([batch[j].sigma for j in idx])
        eps = np.array([probes[j].epsilon for j in idx])
        vecs = np.stack([probes[j].vector(noisy.shape[1:]) for j in idx])
        _, g = sure_value_and_grad(d, noisy, sigma, eps, vecs, scale=len(batch))
        grad += g
    return grad
