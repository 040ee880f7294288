"""PSNR and effective-noise residual statistics."""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import ParameterError, ShapeError

__all__ = ["psnr", "PSNR_CAP", "ResidualHistogram", "residual_histogram"]

PSNR_CAP = 100.0


def psnr(xhat, xgt):
    """``10 log10(255^2 / MSE)``; identical images give ``PSNR_CAP``."""
    a = np.asarray(xhat, dtype=np.float64)
    b = np.asarray(xgt, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"psnr: shapes {a.shape} and {b.shape} differ")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(255.0**2 / mse))


@dataclass(frozen=True)
class ResidualHistogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    ks_statistic: float
    ks_pvalue: float
    excess_kurtosis: float
    std: float
    degenerate: bool = False

    def to_tsv(self):
        """Two columns: bin center, density."""
        centers = 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
        return "".join(f"{c:.6f}\t{d:.8f}\n" for c, d in zip(centers, self.densities))


def residual_histogram(pseudo_clean, xgt, sigma_normalizer, bins=61, span=4.0):
    """Histogram of ``(pseudo_clean - xgt) / sigma_normalizer`` against N(0, 1).

    Densities are normalized over the samples inside ``[-span, span]``. A
    residual that is constant is flagged as degenerate; its statistics are NaN.
    """
    if not sigma_normalizer > 0:
        raise ParameterError(f"sigma_normalizer must be positive, got {sigma_normalizer}")
    a = np.asarray(pseudo_clean, dtype=np.float64).reshape(-1)
    b = np.asarray(xgt, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ShapeError(f"residual_histogram: sizes {a.size} and {b.size} differ")
    r = (a - b) / sigma_normalizer
    edges = np.linspace(-span, span, bins + 1)
    counts, _ = np.histogram(r, bins=edges)
    width = edges[1] - edges[0]
    total = counts.sum()
    dens = counts / (total * width) if total else np.zeros(bins)
    std = float(np.std(r))
    if std == 0.0:
        return ResidualHistogram(edges, dens, float("nan"), float("nan"), float("nan"), std, True)
    ks = stats.kstest(r, "norm")
    kurt = float(stats.kurtosis(r, fisher=True))
    return ResidualHistogram(edges, dens, float(ks.statistic), float(ks.pvalue), kurt, std, False)
