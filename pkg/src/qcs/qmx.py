"""QMX1 binary matrix/vector files.

Layout: 4-byte magic b"QMX1", u32 little-endian rows, u32 little-endian
cols, then rows*cols IEEE-754 little-endian float64 in row-major order.
Vectors are stored with cols = 1.
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"QMX1"
_HEADER = struct.Struct("<4sII")


def save_qmx(path, a) -> None:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"QMX1 stores 1-D or 2-D arrays, got ndim={a.ndim}")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, a.shape[0], a.shape[1]))
        f.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_qmx(path) -> np.ndarray:
    """Load a QMX1 file; a cols==1 file comes back as a 1-D vector."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated QMX1 header")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    need = _HEADER.size + 8 * rows * cols
    if len(raw) != need:
        raise ValueError(f"{path}: expected {need} bytes for {rows}x{cols}, got {len(raw)}")
    a = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(rows, cols)
    a = a.astype(float, copy=True)
    return a[:, 0] if cols == 1 else a
