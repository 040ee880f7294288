"""Measurement operators y = A x + noise.

Three families are provided:

    * GaussianOp    dense i.i.d. N(0, 1/m) matrix
    * CDPOp         coded diffraction: random phase mask, unitary 2-D DFT, row subset
    * MRIOp         2-D DFT restricted to a radial k-space mask

CDP rows are scaled by sqrt(n/m) so that every column of A has unit norm, the
normalization AMP assumes; the random phase spreads image energy evenly over
k-space, which makes that scaling behave. MRI rows keep unit gain (see MRIOp).
Both Fourier families are unitary at full sampling.

Operators are immutable. ``apply`` and ``adjoint`` work on flat vectors; any
array with ``n`` entries is accepted and raveled.
"""

import enum
import struct

import numpy as np
import scipy.fft as sfft

from .errors import FormatError, ParameterError, ShapeError, SizeError

__all__ = [
    "Kind",
    "GaussianOp",
    "CDPOp",
    "MRIOp",
    "make_gaussian_op",
    "make_cdp_op",
    "make_mri_op",
    "radial_mask",
    "apply",
    "adjoint",
    "measure_with_noise",
    "save_op",
    "load_op",
    "MAX_DENSE_ENTRIES",
    "STORE_DENSE_LIMIT",
]

# Refuse to allocate dense Gaussian matrices beyond this many entries (~800 MB).
MAX_DENSE_ENTRIES = 10**8
# Above this many entries a saved Gaussian operator stores only its seed.
STORE_DENSE_LIMIT = 10**7


class Kind(enum.IntEnum):
    GAUSSIAN = 1
    CDP = 2
    MRI = 3


class _Op:
    kind: Kind
    m: int
    n: int
    seed: int
    image_shape: tuple

    @property
    def is_complex(self):
        return self.kind != Kind.GAUSSIAN

    @property
    def rate(self):
        return self.m / self.n

    def _check_x(self, x):
        x = np.asarray(x)
        if x.size != self.n:
            raise ShapeError(f"operator expects {self.n} entries, got {x.size}")
        return x.reshape(-1)

    def _check_z(self, z):
        z = np.asarray(z)
        if z.size != self.m:
            raise ShapeError(f"operator expects {self.m} measurements, got {z.size}")
        return z.reshape(-1)

    def __repr__(self):
        return (f"{type(self).__name__}(m={self.m}, n={self.n}, "
                f"shape={self.image_shape}, seed={self.seed})")


class GaussianOp(_Op):
    kind = Kind.GAUSSIAN

    def __init__(self, matrix, seed, image_shape=None):
        matrix = np.asarray(matrix, dtype=np.float64)
        self.matrix = matrix
        self.matrix.flags.writeable = False
        self.m, self.n = matrix.shape
        self.seed = int(seed)
        self.image_shape = tuple(image_shape) if image_shape else (self.n,)

    def apply(self, x):
        return self.matrix @ self._check_x(x)

    def adjoint(self, z):
        return self.matrix.T @ self._check_z(z)


class _FourierOp(_Op):
    """Shared plumbing for operators of the form c * S F (d * x)."""

    def _init_common(self, image_shape, rows, seed, phase=None):
        self.image_shape = tuple(int(s) for s in image_shape)
        self.n = int(np.prod(self.image_shape))
        self.rows = np.asarray(rows, dtype=np.int64)
        self.rows.flags.writeable = False
        self.m = len(self.rows)
        self.seed = int(seed)
        self.scale = np.sqrt(self.n / self.m)
        self.phase = phase

    def apply(self, x):
        x = self._check_x(x).reshape(self.image_shape)
        if self.phase is not None:
            x = x * self.phase
        k = sfft.fft2(x, norm="ortho").reshape(-1)
        return self.scale * k[self.rows]

    def adjoint(self, z):
        z = self._check_z(z)
        full = np.zeros(self.n, dtype=np.complex128)
        full[self.rows] = z
        out = sfft.ifft2(full.reshape(self.image_shape), norm="ortho")
        if self.phase is not None:
            out = np.conj(self.phase) * out
        return self.scale * out.reshape(-1)


class CDPOp(_FourierOp):
    kind = Kind.CDP

    def __init__(self, image_shape, phase_angles, rows, seed, rate):
        self.phase_angles = np.asarray(phase_angles, dtype=np.float64).reshape(image_shape)
        self.phase_angles.flags.writeable = False
        self._init_common(image_shape, rows, seed, phase=np.exp(1j * self.phase_angles))
        self.requested_rate = float(rate)


class MRIOp(_FourierOp):
    """Masked unitary DFT (no rescaling).

    The radial mask samples the low frequencies densely; scaling its rows by
    sqrt(N/M) would amplify exactly the band where the recovery error lives
    and D-AMP diverges, so k-space samples keep unit gain.
    """

    kind = Kind.MRI

    def __init__(self, mask, seed, rate):
        mask = np.asarray(mask, dtype=bool)
        self.mask = mask
        self.mask.flags.writeable = False
        self._init_common(mask.shape, np.flatnonzero(mask.reshape(-1)), seed)
        self.scale = 1.0
        self.requested_rate = float(rate)


def _shape2(width, height):
    if int(width) < 1 or int(height) < 1:
        raise ParameterError(f"image dimensions must be positive, got {width}x{height}")
    return (int(height), int(width))


def make_gaussian_op(m, n, seed, image_shape=None, max_entries=None):
    """Dense Gaussian sensing matrix with i.i.d. N(0, 1/m) entries."""
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise ParameterError(f"m and n must be positive, got m={m}, n={n}")
    limit = MAX_DENSE_ENTRIES if max_entries is None else max_entries
    if m * n > limit:
        raise SizeError(f"{m}x{n} dense matrix exceeds the {limit}-entry bound")
    if image_shape is not None and int(np.prod(image_shape)) != n:
        raise ShapeError(f"image shape {image_shape} does not have {n} pixels")
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((m, n)) / np.sqrt(m)
    return GaussianOp(matrix, seed, image_shape)


def make_cdp_op(width, height, rate, seed):
    """Coded diffraction pattern operator with a single random phase mask.

    ``A x = sqrt(n/m) * S F (d * x)`` with ``d`` unit-modulus phases, ``F`` the
    unitary 2-D DFT and ``S`` a uniformly random choice of ``floor(rate * n)``
    frequencies.
    """
    shape = _shape2(width, height)
    if not 0.0 < rate <= 1.0:
        raise ParameterError(f"rate must lie in (0, 1], got {rate}")
    n = shape[0] * shape[1]
    m = int(np.floor(rate * n))
    if m < 1:
        raise ParameterError(f"rate {rate} keeps no rows of a {n}-pixel image")
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    if m == n:
        rows = np.arange(n)
    else:
        rows = np.sort(rng.choice(n, size=m, replace=False))
    return CDPOp(shape, angles, rows, seed, rate)


def _spoke_samples(shape, n_spokes, offset):
    """Per-spoke arrays of flat indices ordered from the k-space center outwards."""
    h, w = shape
    cy, cx = h // 2, w // 2
    rmax = int(np.ceil(np.hypot(h, w) / 2)) + 1
    steps = np.arange(0.0, rmax + 0.5, 0.5)
    radii = np.stack([steps, -steps], axis=1).reshape(-1)
    spokes = []
    for k in range(n_spokes):
        theta = offset + np.pi * k / n_spokes
        iy = np.rint(cy + radii * np.sin(theta)).astype(np.int64)
        ix = np.rint(cx + radii * np.cos(theta)).astype(np.int64)
        keep = (iy >= 0) & (iy < h) & (ix >= 0) & (ix < w)
        idx = iy[keep] * w + ix[keep]
        _, first = np.unique(idx, return_index=True)
        spokes.append(idx[np.sort(first)])
    return spokes


def _center_block(shape):
    h, w = shape
    block = np.zeros(shape, dtype=bool)
    cy, cx = h // 2, w // 2
    block[max(cy - 1, 0):cy + 2, max(cx - 1, 0):cx + 2] = True
    return block.reshape(-1)


def radial_mask(width, height, rate, seed=0, tol=0.01):
    """Radial k-space mask in DFT (unshifted) ordering.

    Equi-angular spokes pass through the k-space center, whose 3x3 neighbourhood
    is always sampled. The smallest spoke count reaching ``rate`` is chosen and
    the outer ends of spokes are then trimmed round-robin until the sampled
    fraction is within ``tol`` (relative) of ``rate``.
    """
    shape = _shape2(width, height)
    if not 0.0 < rate <= 1.0:
        raise ParameterError(f"rate must lie in (0, 1], got {rate}")
    n = shape[0] * shape[1]
    if rate == 1.0:
        return np.ones(shape, dtype=bool)
    target = max(1, int(round(rate * n)))
    center = _center_block(shape)
    offset = np.random.default_rng(seed).uniform(0.0, np.pi)

    def coverage(spokes):
        return np.bincount(np.concatenate(spokes), minlength=n)

    lo, hi = 1, 8 * max(shape)
    if (center | (coverage(_spoke_samples(shape, hi, offset)) > 0)).sum() < target:
        raise ParameterError(f"rate {rate} is not reachable with radial spokes on {shape}")
    # Smallest spoke count whose full-length mask reaches the target.
    while lo < hi:
        mid = (lo + hi) // 2
        frac = (center | (coverage(_spoke_samples(shape, mid, offset)) > 0)).sum()
        if frac >= target:
            hi = mid
        else:
            lo = mid + 1
    spokes = _spoke_samples(shape, lo, offset)
    counts = coverage(spokes)
    sampled = int((center | (counts > 0)).sum())

    # Trim outermost samples, cycling over spokes, until the target is met.
    ends = [len(s) for s in spokes]
    k = 0
    while sampled > target and any(e > 1 for e in ends):
        if ends[k] > 1:
            ends[k] -= 1
            idx = spokes[k][ends[k]]
            counts[idx] -= 1
            if counts[idx] == 0 and not center[idx]:
                sampled -= 1
        k = (k + 1) % len(spokes)

    mask = center | (counts > 0)
    achieved = mask.sum() / n
    if abs(achieved - rate) > tol * rate:
        raise ParameterError(
            f"radial mask cannot reach rate {rate} within {tol:.0%}; achieved {achieved:.4f}")
    return np.fft.ifftshift(mask.reshape(shape))


def make_mri_op(width, height, rate, spokes_seed=0):
    """Cartesian DFT sampled on a radial mask (single coil)."""
    mask = radial_mask(width, height, rate, seed=spokes_seed)
    return MRIOp(mask, spokes_seed, rate)


def apply(op, x):
    return op.apply(x)


def adjoint(op, z):
    return op.adjoint(z)


def measure_with_noise(op, x, sigma, seed):
    """``A x + noise`` with per-entry noise variance ``sigma**2``.

    For complex operators the variance is split evenly between the real and
    imaginary parts.
    """
    if sigma < 0:
        raise ParameterError(f"noise sigma must be nonnegative, got {sigma}")
    y = op.apply(x)
    if sigma == 0:
        return y
    rng = np.random.default_rng(seed)
    if op.is_complex:
        s = sigma / np.sqrt(2.0)
        noise = s * rng.standard_normal(op.m) + 1j * s * rng.standard_normal(op.m)
    else:
        noise = sigma * rng.standard_normal(op.m)
    return y + noise


# -- file format -------------------------------------------------------------
#
# magic(8) version(u8) kind(u8) flags(u8) pad(u8) m(u64) n(u64) height(u64)
# width(u64) seed(i64) rate(f64) payload_count(u64), then payload_count
# little-endian float64 values.

MAGIC = b"\x89AMPOP\r\n"
VERSION = 1
_HEADER = struct.Struct("<8sBBBBQQQQqdQ")
_FLAG_REGENERATE = 1


def _payload(op):
    if op.kind == Kind.GAUSSIAN:
        if op.m * op.n > STORE_DENSE_LIMIT:
            return _FLAG_REGENERATE, np.empty(0)
        return 0, op.matrix.reshape(-1)
    if op.kind == Kind.CDP:
        return 0, np.concatenate([op.phase_angles.reshape(-1), op.rows.astype(np.float64)])
    return 0, op.mask.reshape(-1).astype(np.float64)


def save_op(op, path):
    flags, payload = _payload(op)
    if len(op.image_shape) == 1:
        h, w = 1, op.image_shape[0]
    else:
        h, w = op.image_shape
    rate = getattr(op, "requested_rate", op.rate)
    header = _HEADER.pack(MAGIC, VERSION, int(op.kind), flags, 0, op.m, op.n, h, w,
                          op.seed, rate, payload.size)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(payload, dtype="<f8").tobytes())


def load_op(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FormatError(
            f"truncated header: {_HEADER.size - len(data)} bytes missing of {_HEADER.size}")
    magic, version, kind, flags, _, m, n, h, w, seed, rate, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError("not an operator file (bad magic bytes)")
    if version != VERSION:
        raise FormatError(f"unsupported operator file version {version}")
    try:
        kind = Kind(kind)
    except ValueError:
        raise FormatError(f"unknown operator kind byte {kind}") from None
    need = count * 8
    body = data[_HEADER.size:]
    if len(body) < need:
        raise FormatError(f"truncated payload: {need - len(body)} bytes missing of {need}")
    if len(body) > need:
        raise FormatError(f"{len(body) - need} trailing bytes after payload")
    payload = np.frombuffer(body, dtype="<f8").astype(np.float64)
    shape = (int(h), int(w))

    if kind == Kind.GAUSSIAN:
        image_shape = (int(w),) if h == 1 else shape
        if flags & _FLAG_REGENERATE:
            return make_gaussian_op(m, n, seed, image_shape=image_shape,
                                    max_entries=max(MAX_DENSE_ENTRIES, m * n))
        if payload.size != m * n:
            raise FormatError(f"gaussian payload has {payload.size} values, expected {m * n}")
        return GaussianOp(payload.reshape(m, n), seed, image_shape)
    if kind == Kind.CDP:
        if payload.size != n + m:
            raise FormatError(f"CDP payload has {payload.size} values, expected {n + m}")
        return CDPOp(shape, payload[:n], payload[n:].astype(np.int64), seed, rate)
    if payload.size != n:
        raise FormatError(f"MRI payload has {payload.size} values, expected {n}")
    return MRIOp(payload.reshape(shape) != 0, seed, rate)
