"""Textbook scalar AMP with soft thresholding, written against the raw matrix."""

import numpy as np


def scalar_amp(A, y, k, iterations):
    """Iterates of AMP with threshold ``k * ||z|| / sqrt(M)`` and exact Onsager term."""
    M, N = A.shape
    xh = np.zeros(N)
    z = y.copy()
    out = []
    for t in range(iterations):
        onsager = z * np.count_nonzero(xh) / M if t > 0 else 0.0
        z = y - A @ xh + onsager
        tau = k * np.linalg.norm(z) / np.sqrt(M)
        v = xh + A.T @ z
        xh = np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)
        out.append(xh.copy())
    return out
