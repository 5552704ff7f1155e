"""QSB1 frames: magic, u32-LE header length, JSON header, float64-LE payload.

Header fields: {type, n, beta, dtype, request_id}; responses add beta_used.
This module is deliberately self-contained: the bridge speaks the wire
format and nothing else of its clients.
"""

import json
import struct

import numpy as np

MAGIC = b"QSB1"
LEN = struct.Struct("<I")
MAX_HEADER = 1 << 20
MAX_N = 1 << 27


class FrameError(ValueError):
    """Malformed incoming frame; carries the request_id when one was parsed."""

    def __init__(self, message, request_id=None):
        super().__init__(message)
        self.request_id = request_id


def encode(frame_type: str, payload=None, request_id=None, **extra) -> bytes:
    payload = np.array([], dtype="<f8") if payload is None else np.ascontiguousarray(payload, dtype="<f8")
    header = {"type": frame_type, "n": int(payload.size), "dtype": "f64", "request_id": request_id}
    header.update(extra)
    raw = json.dumps(header).encode("utf-8")
    return MAGIC + LEN.pack(len(raw)) + raw + payload.tobytes()


def read_frame(read_exact):
    """Decode one frame from a read_exact(k) -> bytes source.

    Raises FrameError for malformed content; the stream position is left
    after the bytes consumed so far, so callers with frame-shaped input can
    keep the connection alive.
    """
    magic = read_exact(4)
    if magic != MAGIC:
        raise FrameError(f"bad magic {magic!r}")
    (hlen,) = LEN.unpack(read_exact(4))
    if hlen > MAX_HEADER:
        raise FrameError(f"header length {hlen} exceeds limit")
    try:
        header = json.loads(read_exact(hlen).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"undecodable header: {exc}") from exc
    if not isinstance(header, dict):
        raise FrameError("header is not an object")
    rid = header.get("request_id")
    n = header.get("n")
    if not isinstance(n, int) or n < 0 or n > MAX_N:
        raise FrameError(f"bad payload length {n!r}", request_id=rid)
    if header.get("dtype", "f64") != "f64":
        raise FrameError(f"unsupported dtype {header.get('dtype')!r}", request_id=rid)
    payload = np.frombuffer(read_exact(8 * n), dtype="<f8").astype(float) if n else np.empty(0)
    return header, payload
