"""Noise-level parameterized denoisers and Monte-Carlo divergence.

Every denoiser is called as ``d(x, sigma)`` with ``x`` an image (or vector) on
the 0-255 intensity scale and ``sigma`` the standard deviation of the additive
Gaussian noise it should remove. Denoisers are immutable.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import CapabilityError, ParameterError, SigmaRangeError

__all__ = [
    "Denoiser",
    "Identity",
    "Scale",
    "FixedOutput",
    "SoftThresholdDCT",
    "HardThresholdDCT",
    "DivergenceProbe",
    "DenoiserInput",
    "denoise",
    "mc_divergence",
    "analytic_divergence",
    "soft_threshold",
]


@dataclass(frozen=True)
class DenoiserInput:
    image: np.ndarray
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ParameterError(f"sigma must be nonnegative, got {self.sigma}")


@dataclass(frozen=True)
class DivergenceProbe:
    """Seeded standard-normal perturbation used by :func:`mc_divergence`."""

    epsilon: float
    seed: int

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"probe epsilon must be positive, got {self.epsilon}")

    def vector(self, shape):
        return np.random.default_rng(self.seed).standard_normal(shape)


def soft_threshold(c, tau):
    return np.sign(c) * np.maximum(np.abs(c) - tau, 0.0)


class Denoiser:
    """Base class. Subclasses implement ``_denoise``."""

    sigma_range = (0.0, np.inf)

    def __call__(self, x, sigma):
        lo, hi = self.sigma_range
        if not lo <= sigma <= hi:
            raise SigmaRangeError(
                f"{type(self).__name__} supports sigma in [{lo}, {hi}], got {sigma:.4g}")
        return self._denoise(np.asarray(x, dtype=np.float64), float(sigma))

    def _denoise(self, x, sigma):
        raise NotImplementedError

    def divergence(self, x, sigma):
        raise CapabilityError(f"{type(self).__name__} has no analytic divergence")


class Identity(Denoiser):
    def _denoise(self, x, sigma):
        return x.copy()

    def divergence(self, x, sigma):
        return float(np.size(x))

    def __repr__(self):
        return "Identity()"


class Scale(Denoiser):
    def __init__(self, c):
        self.c = float(c)

    def _denoise(self, x, sigma):
        return self.c * x

    def divergence(self, x, sigma):
        return self.c * np.size(x)

    def __repr__(self):
        return f"Scale({self.c})"


class FixedOutput(Denoiser):
    """Ignores its input. ``FixedOutput(x_true)`` is an oracle, ``FixedOutput(0)`` the zero map."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=np.float64)

    def _denoise(self, x, sigma):
        return np.broadcast_to(self.value, x.shape).copy()

    def divergence(self, x, sigma):
        return 0.0


def _dct(x):
    return sfft.dctn(x, norm="ortho")


def _idct(c):
    return sfft.idctn(c, norm="ortho")


class SoftThresholdDCT(Denoiser):
    """Soft thresholding of orthonormal DCT coefficients at ``k * sigma``.

    ``transform="identity"`` thresholds the samples themselves, which is the
    classical sparse-vector denoiser.
    """

    def __init__(self, k=2.5, transform="dct"):
        if transform not in ("dct", "identity"):
            raise ParameterError(f"unknown transform {transform!r}")
        self.k = float(k)
        self.transform = transform

    def _forward(self, x):
        return _dct(x) if self.transform == "dct" else x

    def _inverse(self, c):
        return _idct(c) if self.transform == "dct" else c

    def _denoise(self, x, sigma):
        return self._inverse(soft_threshold(self._forward(x), self.k * sigma))

    def divergence(self, x, sigma):
        # Orthonormal transforms leave the Jacobian trace unchanged.
        tau = self.k * sigma
        if tau == 0:
            return float(np.size(x))
        return float(np.count_nonzero(np.abs(self._forward(np.asarray(x, float))) > tau))

    def __repr__(self):
        return f"SoftThresholdDCT(k={self.k}, transform={self.transform!r})"


class HardThresholdDCT(Denoiser):
    """Block DCT hard thresholding with overlap averaging.

    Overlapping ``block`` x ``block`` windows (step ``stride``) are transformed
    with an orthonormal DCT, coefficients below ``k * sigma`` are zeroed and the
    blocks are averaged back with uniform weights. The DC coefficient of every
    block is kept so the local mean survives very high noise levels.
    """

    def __init__(self, k=2.7, block=16, stride=4):
        self.k = float(k)
        self.block = int(block)
        self.stride = int(stride)

    @staticmethod
    def _positions(size, block, stride):
        pos = list(range(0, size - block + 1, stride))
        if pos[-1] != size - block:
            pos.append(size - block)
        return pos

    def _denoise(self, x, sigma):
        if x.ndim != 2:
            raise ParameterError("HardThresholdDCT needs a 2-D image")
        h, w = x.shape
        bh, bw = min(self.block, h), min(self.block, w)
        win = np.lib.stride_tricks.sliding_window_view(x, (bh, bw))
        rows = self._positions(h, bh, self.stride)
        cols = self._positions(w, bw, self.stride)
        patches = win[np.ix_(rows, cols)]
        coef = sfft.dctn(patches, axes=(-2, -1), norm="ortho")
        dc = coef[..., 0, 0].copy()
        coef[np.abs(coef) < self.k * sigma] = 0.0
        coef[..., 0, 0] = dc
        patches = sfft.idctn(coef, axes=(-2, -1), norm="ortho")

        out = np.zeros_like(x)
        weight = np.zeros_like(x)
        for i, r in enumerate(rows):
            for j, c in enumerate(cols):
                out[r:r + bh, c:c + bw] += patches[i, j]
                weight[r:r + bh, c:c + bw] += 1.0
        return out / weight

    def __repr__(self):
        return f"HardThresholdDCT(k={self.k}, block={self.block}, stride={self.stride})"


def denoise(d, x, sigma):
    return d(x, sigma)


def mc_divergence(d, x, sigma, probe, reference=None):
    """One-probe Monte-Carlo estimate of the divergence of ``d`` at ``x``.

    ``reference`` may carry a precomputed ``d(x, sigma)`` to save one call.
    """
    x = np.asarray(x, dtype=np.float64)
    n = probe.vector(x.shape)
    base = d(x, sigma) if reference is None else reference
    moved = d(x + probe.epsilon * n, sigma)
    return float(np.vdot(n, moved - base) / probe.epsilon)


def analytic_divergence(d, x, sigma):
    return d.divergence(np.asarray(x, dtype=np.float64), sigma)
