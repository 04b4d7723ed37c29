"""Matrix file formats.

``cmx1`` binary: magic ``b"CMX1"``, little-endian u32 rows, u32 cols, then
rows*cols pairs of little-endian float64 (re, im), row-major.

CSV text: one matrix row per line, comma-separated ``re+imj`` tokens, using
``repr`` floats so the round trip is exact.
"""
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"CMX1"
_HEADER = struct.Struct("<4sII")


def encode_cmx1(m):
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise FormatError(f"cmx1 stores 2-D matrices, got {m.ndim}-D")
    rows, cols = m.shape
    payload = np.ascontiguousarray(m).view(np.float64).astype("<f8", copy=False)
    return _HEADER.pack(MAGIC, rows, cols) + payload.tobytes()


def decode_cmx1(buf):
    if len(buf) < _HEADER.size:
        raise FormatError("truncated cmx1 header")
    magic, rows, cols = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    expected = _HEADER.size + rows * cols * 16
    if len(buf) != expected:
        raise FormatError(f"cmx1 payload is {len(buf) - _HEADER.size} bytes, expected {rows * cols * 16}")
    data = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    return data.view(np.complex128).reshape(rows, cols).copy()


def write_cmx1(path, m):
    Path(path).write_bytes(encode_cmx1(m))


def read_cmx1(path):
    return decode_cmx1(Path(path).read_bytes())


def _token(z):
    im = z.imag
    sign = "-" if (im < 0 or (im == 0 and np.signbit(im))) else "+"
    return f"{z.real!r}{sign}{abs(im)!r}j"


def write_csv(path, m):
    m = np.asarray(m, dtype=np.complex128)
    lines = [",".join(_token(complex(z)) for z in row) for row in m]
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([complex(tok.strip()) for tok in line.split(",")])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise FormatError("ragged or empty CSV matrix")
    return np.array(rows, dtype=np.complex128)
