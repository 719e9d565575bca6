"""BRS band-stack container and binary PGM (P5) import/export.

BRS layout (all little-endian)::

    offset 0   b"BRS1"
    offset 4   width       uint32
    offset 8   height      uint32
    offset 12  band_count  uint32
    offset 16  band_count planes of width*height float32, row-major
"""
import os
import re
import struct

import numpy as np

from bwfusion.errors import FormatError
from bwfusion.raster import BandStack, as_band

BRS_MAGIC = b"BRS1"
_HEADER = struct.Struct("<4sIII")


def brs_size(width, height, bands):
    return _HEADER.size + 4 * width * height * bands


def encode_brs(stack):
    if not isinstance(stack, BandStack):
        stack = BandStack(stack)
    with np.errstate(over="ignore"):
        data = stack.data.astype("<f4")
    bad = np.flatnonzero(~np.isfinite(data.ravel()))
    if bad.size:
        raise FormatError("sample overflows float32", _HEADER.size + 4 * int(bad[0]))
    n, h, w = data.shape
    return _HEADER.pack(BRS_MAGIC, w, h, n) + data.tobytes()


def decode_brs(buf):
    if len(buf) < _HEADER.size:
        raise FormatError(f"truncated header: {len(buf)} of {_HEADER.size} bytes", len(buf))
    magic, w, h, n = _HEADER.unpack_from(buf)
    if magic != BRS_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {BRS_MAGIC!r}", 0)
    for off, (label, v) in zip((4, 8, 12), (("width", w), ("height", h), ("band_count", n))):
        if v == 0:
            raise FormatError(f"{label} is zero", off)
    expected = brs_size(w, h, n)
    if len(buf) < expected:
        raise FormatError(f"truncated data: {len(buf)} of {expected} bytes", len(buf))
    if len(buf) > expected:
        raise FormatError(f"{len(buf) - expected} trailing bytes", expected)
    data = np.frombuffer(buf, dtype="<f4", offset=_HEADER.size).reshape(n, h, w)
    bad = np.flatnonzero(~np.isfinite(data.ravel()))
    if bad.size:
        raise FormatError("non-finite sample", _HEADER.size + 4 * int(bad[0]))
    return BandStack(data.astype(np.float64))


def save_brs(path, stack):
    with open(path, "wb") as fh:
        fh.write(encode_brs(stack))


def load_brs(path):
    with open(path, "rb") as fh:
        return decode_brs(fh.read())


_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def decode_pgm(buf, scale=False):
    """Decode a binary P5 PGM into a float band.

    Samples keep their integer counts unless ``scale`` is set, in which case
    they are divided by maxval.
    """
    if buf[:2] != b"P5":
        raise FormatError(f"not a binary PGM (magic {buf[:2]!r})", 0)
    pos = 2
    fields = []
    for _ in range(3):
        m = _PGM_TOKEN.match(buf, pos)
        if not m:
            raise FormatError("truncated PGM header", pos)
        try:
            fields.append(int(m.group(1)))
        except ValueError:
            raise FormatError(f"bad PGM header field {m.group(1)!r}", m.start(1)) from None
        pos = m.end()
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"bad PGM size {width}x{height}", pos)
    if not 1 <= maxval <= 65535:
        raise FormatError(f"PGM maxval {maxval} outside 1..65535", pos)
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise FormatError("missing whitespace after PGM header", pos)
    pos += 1
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    expected = pos + width * height * dtype.itemsize
    if len(buf) < expected:
        raise FormatError(f"truncated PGM data: {len(buf)} of {expected} bytes", len(buf))
    raw = np.frombuffer(buf, dtype=dtype, count=width * height, offset=pos).reshape(height, width)
    band = raw.astype(np.float64)
    return band / maxval if scale else band


def encode_pgm(band, maxval=255, scale=False):
    """Quantize a band to P5 PGM: clamp to ``[0, maxval]``, round half away from zero."""
    band = as_band(band)
    if not 1 <= maxval <= 65535:
        raise FormatError(f"PGM maxval {maxval} outside 1..65535")
    v = band * maxval if scale else band
    v = np.clip(v, 0, maxval)
    q = np.floor(v + 0.5)  # v >= 0, so this is half-away-from-zero
    dtype = "u1" if maxval < 256 else ">u2"
    h, w = band.shape
    return f"P5\n{w} {h}\n{maxval}\n".encode("ascii") + q.astype(dtype).tobytes()


def load_pgm(path, scale=False):
    with open(path, "rb") as fh:
        return decode_pgm(fh.read(), scale)


def save_pgm(path, band, maxval=255, scale=False):
    with open(path, "wb") as fh:
        fh.write(encode_pgm(band, maxval, scale))


def load_stack(path):
    """Load a BRS file, or a PGM as a one-band stack, by content."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] == BRS_MAGIC:
        return decode_brs(buf)
    if buf[:2] == b"P5":
        return BandStack(decode_pgm(buf))
    raise FormatError(f"{os.fspath(path)}: neither BRS nor P5 PGM", 0)


def load_band(path):
    """Load a single-band raster."""
    stack = load_stack(path)
    if len(stack) != 1:
        raise FormatError(f"{os.fspath(path)}: expected 1 band, found {len(stack)}", 12)
    return stack.data[0].copy()
