"""Binary weight files (``.ampw``).

Layout, little-endian: 8-byte magic, u8 version, 15-byte NUL-padded arch tag,
f64 sigma_lo, f64 sigma_hi, u64 count, then ``count`` f64 weights.
"""

import struct

import numpy as np

from ..errors import FormatError
from .models import ARCHITECTURES

__all__ = ["save_weights", "load_weights", "MAGIC", "VERSION"]

MAGIC = b"\x89AMPW\r\n\x1a"
VERSION = 1
_HEADER = struct.Struct("<8sB15sddQ")


def to_bytes(d):
    tag = d.arch.encode("ascii")
    head = _HEADER.pack(MAGIC, VERSION, tag, d.sigma_range[0], d.sigma_range[1], d.weights.size)
    return head + np.asarray(d.weights, dtype="<f8").tobytes()


def from_bytes(buf):
    if len(buf) < _HEADER.size:
        raise FormatError(f"weight file truncated: {_HEADER.size - len(buf)} header bytes missing")
    magic, version, tag, lo, hi, count = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError("not an .ampw file (bad magic)")
    if version != VERSION:
        raise FormatError(f"unsupported .ampw version {version}")
    arch = tag.rstrip(b"\0").decode("ascii", errors="replace")
    if arch not in ARCHITECTURES:
        raise FormatError(f"unknown architecture tag {arch!r}")
    need = _HEADER.size + 8 * count
    if len(buf) < need:
        raise FormatError(f"weight payload truncated: {need - len(buf)} bytes missing of {8 * count}")
    if len(buf) > need:
        raise FormatError(f"{len(buf) - need} trailing bytes after weights")
    w = np.frombuffer(buf, dtype="<f8", count=count, offset=_HEADER.size).astype(np.float64)
    cls = ARCHITECTURES[arch]
    try:
        return cls(w, sigma_range=(lo, hi))
    except Exception as exc:
        raise FormatError(f"invalid weights for {arch}: {exc}") from exc


def save_weights(d, path):
    with open(path, "wb") as f:
        f.write(to_bytes(d))


def load_weights(path):
    with open(path, "rb") as f:
        return from_bytes(f.read())
