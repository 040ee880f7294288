"""8-bit grayscale image input/output: binary PGM (P5) natively, PNG through Pillow."""

import os

import numpy as np

from ..errors import FormatError, ParameterError

__all__ = ["read_pgm", "write_pgm", "ingest_image", "center_crop", "quantize", "IMAGE_SUFFIXES"]

IMAGE_SUFFIXES = (".pgm", ".png")


def _tokens(data, count):
    """First ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    out, pos = [], 0
    while len(out) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise FormatError("PGM header truncated")
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        out.append(data[start:pos])
    return out, pos


def read_pgm(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    (magic, w, h, maxval), pos = _tokens(data, 4)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise FormatError(f"{path}: malformed PGM header") from None
    if w < 1 or h < 1:
        raise FormatError(f"{path}: bad PGM size {w}x{h}")
    if maxval > 255:
        raise FormatError(f"{path}: 16-bit PGM is not supported (maxval {maxval})")
    if maxval < 1:
        raise FormatError(f"{path}: bad PGM maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    pixels = data[pos:pos + w * h]
    if len(pixels) < w * h:
        raise FormatError(f"{path}: PGM raster truncated: {w * h - len(pixels)} bytes missing of {w * h}")
    img = np.frombuffer(pixels, dtype=np.uint8).reshape(h, w).astype(np.float64)
    if maxval != 255:
        img = img * (255.0 / maxval)
    return img


def quantize(img):
    """Round and clamp to the 8-bit range; this is what an image file stores."""
    return np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)


def write_pgm(path, img):
    q = quantize(img)
    if q.ndim != 2:
        raise ParameterError(f"expected a 2-D image, got shape {q.shape}")
    h, w = q.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(q.tobytes())


def _read_png(path):
    from PIL import Image

    try:
        im = Image.open(path)
        im.load()
    except Exception as exc:
        raise FormatError(f"{path}: unreadable image ({exc})") from exc
    if im.mode in ("I;16", "I;16B", "I;16L", "I", "F"):
        raise FormatError(f"{path}: unsupported bit depth (mode {im.mode}); 8-bit grayscale expected")
    if im.mode != "L":
        raise FormatError(f"{path}: color or non-grayscale image (mode {im.mode})")
    return np.asarray(im, dtype=np.float64)


def center_crop(img, size):
    """Center ``size x size`` (or ``(h, w)``) window."""
    h, w = (size, size) if np.isscalar(size) else size
    H, W = img.shape
    if h > H or w > W:
        raise ParameterError(f"crop {h}x{w} larger than image {H}x{W}")
    r, c = (H - h) // 2, (W - w) // 2
    return img[r:r + h, c:c + w]


def ingest_image(path, size=None, subsample=1):
    """Load an image in [0, 255]; optionally subsample by an integer step, then center-crop."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".pgm":
        img = read_pgm(path)
    elif ext == ".png":
        img = _read_png(path)
    else:
        raise FormatError(f"{path}: unsupported format {ext or '(none)'}")
    if subsample > 1:
        img = img[::subsample, ::subsample]
    if size is not None:
        img = center_crop(img, size)
    return np.ascontiguousarray(img)
