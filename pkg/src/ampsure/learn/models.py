"""Trainable denoisers with hand-written reverse-mode gradients.

Each model maps a stack of images ``(B, H, W)`` and per-image noise levels
``(B,)`` to denoised images. ``forward`` returns the output and a cache;
``backward(cache, cotangent)`` returns the gradient of ``sum(cotangent * out)``
with respect to the flat weight vector.
"""

import numpy as np
import scipy.fft as sfft
from numpy.lib.stride_tricks import sliding_window_view

from ..denoise import Denoiser, soft_threshold
from ..errors import ParameterError, ShapeError

__all__ = [
    "TrainableDenoiser",
    "LearnedShrinkage",
    "SmallResidualCNN",
    "ScalarGain",
    "band_groups",
    "ARCHITECTURES",
]

N_BANDS = 16


class TrainableDenoiser(Denoiser):
    arch = None
    n_weights = None

    def __init__(self, weights=None, sigma_range=(0.0, 55.0), training_trace=()):
        w = self.default_weights() if weights is None else np.array(weights, dtype=np.float64)
        w = w.reshape(-1)
        if self.n_weights is not None and w.size != self.n_weights:
            raise ShapeError(f"{self.arch} needs {self.n_weights} weights, got {w.size}")
        if not np.all(np.isfinite(w)):
            raise ParameterError("weights must be finite")
        w.flags.writeable = False
        self.weights = w
        self.sigma_range = (float(sigma_range[0]), float(sigma_range[1]))
        self.training_trace = tuple(training_trace)

    def default_weights(self):
        raise NotImplementedError

    def with_weights(self, weights, training_trace=None):
        trace = self.training_trace if training_trace is None else training_trace
        return type(self)(weights, self.sigma_range, trace)

    def forward(self, x, sigma):
        raise NotImplementedError

    def backward(self, cache, cotangent):
        raise NotImplementedError

    def _denoise(self, x, sigma):
        if x.ndim != 2:
            raise ShapeError(f"{self.arch} denoises 2-D images, got shape {x.shape}")
        out, _ = self.forward(x[None], np.array([sigma]))
        return out[0]

    def __repr__(self):
        return f"{type(self).__name__}({self.weights.size} weights, sigma_range={self.sigma_range})"


class ScalarGain(TrainableDenoiser):
    """``D(z) = c z`` with the single weight ``c``."""

    arch = "scalar"
    n_weights = 1

    def default_weights(self):
        return np.ones(1)

    def forward(self, x, sigma):
        return self.weights[0] * x, x

    def backward(self, cache, cotangent):
        return np.array([np.sum(cotangent * cache)])


def band_groups(h, w):
    """Map each DCT coefficient of an ``h x w`` image to one of 16 bands.

    Bands are diagonal strips of normalized frequency ``(u/h + v/w) / 2``, so
    the same weights apply to any image size.
    """
    u = np.arange(h)[:, None] / h
    v = np.arange(w)[None, :] / w
    return np.minimum(N_BANDS - 1, np.floor(N_BANDS * (u + v) / 2)).astype(np.int64)


class LearnedShrinkage(TrainableDenoiser):
    """Soft thresholding of 2-D DCT coefficients with one threshold per band.

    The threshold for band ``g`` at noise level ``sigma`` is ``w[g]**2 * sigma``;
    squaring keeps it nonnegative.
    """

    arch = "shrinkage"
    n_weights = N_BANDS

    def default_weights(self):
        return np.full(N_BANDS, np.sqrt(2.0))

    @property
    def thresholds(self):
        return self.weights**2

    def forward(self, x, sigma):
        groups = band_groups(*x.shape[-2:])
        coef = sfft.dctn(x, axes=(-2, -1), norm="ortho")
        tau = self.thresholds[groups][None] * np.asarray(sigma, dtype=np.float64)[:, None, None]
        out = sfft.idctn(soft_threshold(coef, tau), axes=(-2, -1), norm="ortho")
        return out, (coef, tau, groups, sigma)

    def backward(self, cache, cotangent):
        coef, tau, groups, sigma = cache
        g_coef = sfft.dctn(cotangent, axes=(-2, -1), norm="ortho")
        active = np.abs(coef) > tau
        # d soft(c, t) / dt = -sign(c) on the active set; dt/dw_g = 2 w_g sigma.
        contrib = -g_coef * np.sign(coef) * active * np.asarray(sigma)[:, None, None]
        per_band = np.bincount(np.broadcast_to(groups, contrib.shape).reshape(-1),
                               weights=contrib.reshape(-1), minlength=N_BANDS)
        return per_band * 2.0 * self.weights


def _conv(a, kernel, bias):
    ap = np.pad(a, ((0, 0), (0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(ap, (3, 3), axis=(2, 3))
    out = np.einsum("bchwij,ocij->bohw", win, kernel, optimize=True)
    return out + bias[None, :, None, None], win


def _conv_backward(win, kernel, grad_out, need_input=True):
    g_kernel = np.einsum("bchwij,bohw->ocij", win, grad_out, optimize=True)
    g_bias = grad_out.sum(axis=(0, 2, 3))
    g_in = None
    if need_input:
        gp = np.pad(grad_out, ((0, 0), (0, 0), (1, 1), (1, 1)))
        gwin = sliding_window_view(gp, (3, 3), axis=(2, 3))
        g_in = np.einsum("bohwij,ocij->bchw", gwin, kernel[:, :, ::-1, ::-1], optimize=True)
    return g_kernel, g_bias, g_in


class SmallResidualCNN(TrainableDenoiser):
    """Four 3x3 convolution layers (1-16-16-16-1) with tanh between them.

    The network predicts the noise: ``D(x) = x - 255 f(x / 255)``. All-zero
    weights give the identity map. The noise level is not an input.
    """

    arch = "cnn"
    channels = (1, 16, 16, 16, 1)
    scale = 255.0

    def _shapes(self):
        c = self.channels
        return [((c[i + 1], c[i], 3, 3), (c[i + 1],)) for i in range(len(c) - 1)]

    @property
    def n_weights(self):
        return sum(int(np.prod(k)) + int(np.prod(b)) for k, b in self._shapes())

    def default_weights(self, rng=None):
        """Small random weights; the last layer starts at zero (identity map)."""
        rng = np.random.default_rng(0 if rng is None else rng)
        parts = []
        shapes = self._shapes()
        for i, (ks, bs) in enumerate(shapes):
            fan_in = ks[1] * 9
            if i == len(shapes) - 1:
                parts.append(np.zeros(int(np.prod(ks))))
            else:
                parts.append(rng.standard_normal(int(np.prod(ks))) / np.sqrt(fan_in))
            parts.append(np.zeros(int(np.prod(bs))))
        return np.concatenate(parts)

    def layers(self):
        out, pos = [], 0
        for ks, bs in self._shapes():
            nk, nb = int(np.prod(ks)), int(np.prod(bs))
            out.append((self.weights[pos:pos + nk].reshape(ks), self.weights[pos + nk:pos + nk + nb]))
            pos += nk + nb
        return out

    def forward(self, x, sigma):
        a = (x / self.scale)[:, None]
        layers = self.layers()
        wins, acts = [], []
        for i, (k, b) in enumerate(layers):
            h, win = _conv(a, k, b)
            wins.append(win)
            if i < len(layers) - 1:
                a = np.tanh(h)
                acts.append(a)
            else:
                a = h
        out = x - self.scale * a[:, 0]
        return out, (wins, acts)

    def backward(self, cache, cotangent):
        wins, acts = cache
        layers = self.layers()
        grads = [None] * len(layers)
        g = (-self.scale * cotangent)[:, None]
        for i in range(len(layers) - 1, -1, -1):
            k, _ = layers[i]
            gk, gb, g_in = _conv_backward(wins[i], k, g, need_input=i > 0)
            grads[i] = (gk, gb)
            if i > 0:
                g = g_in * (1.0 - acts[i - 1] ** 2)
        return np.concatenate([np.concatenate([gk.reshape(-1), gb]) for gk, gb in grads])


ARCHITECTURES = {cls.arch: cls for cls in (LearnedShrinkage, SmallResidualCNN, ScalarGain)}
