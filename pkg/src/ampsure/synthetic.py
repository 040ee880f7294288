"""Synthetic piecewise-smooth test images on the 0-255 scale."""

import numpy as np

__all__ = ["piecewise_smooth", "image_set", "sparse_signal"]


def piecewise_smooth(size, rng):
    """Smooth background (ramp plus low-frequency wave) with a few flat shapes.

    ``size`` is an int or an ``(height, width)`` pair.
    """
    rng = np.random.default_rng(rng)
    h, w = (size, size) if np.isscalar(size) else size
    yy, xx = np.mgrid[0:h, 0:w]
    yy = yy / h
    xx = xx / w

    img = rng.uniform(60, 140) + rng.uniform(-40, 40) * xx + rng.uniform(-40, 40) * yy
    fx, fy = rng.uniform(0.3, 1.5, size=2)
    img = img + rng.uniform(15, 45) * np.sin(2 * np.pi * (fx * xx + fy * yy) + rng.uniform(0, 2 * np.pi))

    for _ in range(rng.integers(3, 7)):
        level = rng.uniform(-70, 70)
        if rng.random() < 0.5:
            cy, cx = rng.uniform(0.1, 0.9, size=2)
            r = rng.uniform(0.06, 0.25)
            region = (yy - cy) ** 2 + (xx - cx) ** 2 < r * r
        else:
            y0, x0 = rng.uniform(0.0, 0.75, size=2)
            y1 = y0 + rng.uniform(0.1, 0.4)
            x1 = x0 + rng.uniform(0.1, 0.4)
            region = (yy >= y0) & (yy < y1) & (xx >= x0) & (xx < x1)
        img = img + level * region
    return np.clip(img, 0.0, 255.0)


def image_set(count, size, seed):
    """``count`` independent piecewise-smooth images from one seed."""
    rngs = np.random.default_rng(seed).spawn(count)
    return [piecewise_smooth(size, r) for r in rngs]


def sparse_signal(n, k, rng):
    """Length-``n`` vector with ``k`` standard-normal nonzeros at random positions."""
    rng = np.random.default_rng(rng)
    x = np.zeros(n)
    x[rng.choice(n, size=k, replace=False)] = rng.standard_normal(k)
    return x
