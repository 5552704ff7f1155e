"""Client for external score servers speaking the QSB1 wire protocol.

Frame layout: 4-byte magic b"QSB1", u32 little-endian header length, UTF-8
JSON header {type, n, beta, dtype, request_id}, then n*8 bytes of IEEE-754
little-endian float64 payload.  The endpoint is either "host:port" (TCP) or
a command line to spawn, in which case frames travel over the child's
stdin/stdout.  One client serializes its requests; independent clients own
independent connections.
"""

import json
import selectors
import shlex
import socket
import struct
import subprocess
import threading

import numpy as np

from .priors import PriorScoreModel

__all__ = [
    "BridgeError",
    "BridgeTimeoutError",
    "BridgeProtocolError",
    "BridgeRemoteError",
    "BridgeDimensionError",
    "BridgeClient",
    "RemotePrior",
    "remote_score",
    "encode_frame",
    "MAGIC",
]

MAGIC = b"QSB1"
_LEN = struct.Struct("<I")
_MAX_HEADER = 1 << 20
_MAX_N = 1 << 27


class BridgeError(Exception):
    """Base class for bridge transport failures."""


class BridgeTimeoutError(BridgeError):
    pass


class BridgeProtocolError(BridgeError):
    """Malformed frame or connection loss mid-frame."""


class BridgeRemoteError(BridgeError):
    """The server reported a failure for this request."""


class BridgeDimensionError(BridgeError):
    pass


def encode_frame(frame_type: str, payload: np.ndarray = None, request_id: int = 0, **header_extra) -> bytes:
    payload = np.array([], dtype="<f8") if payload is None else np.ascontiguousarray(payload, dtype="<f8")
    header = {"type": frame_type, "n": int(payload.size), "dtype": "f64", "request_id": int(request_id)}
    header.update(header_extra)
    raw = json.dumps(header).encode("utf-8")
    return MAGIC + _LEN.pack(len(raw)) + raw + payload.tobytes()


def decode_frame(read_exact):
    """Read one frame via read_exact(k)->bytes; returns (header dict, payload array)."""
    magic = read_exact(4)
    if magic != MAGIC:
        raise BridgeProtocolError(f"bad magic {magic!r}")
    (hlen,) = _LEN.unpack(read_exact(4))
    if hlen > _MAX_HEADER:
        raise BridgeProtocolError(f"header length {hlen} exceeds limit")
    try:
        header = json.loads(read_exact(hlen).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BridgeProtocolError(f"undecodable header: {exc}") from exc
    if not isinstance(header, dict) or "type" not in header or "n" not in header:
        raise BridgeProtocolError(f"header missing required fields: {header!r}")
    n = header["n"]
    if not isinstance(n, int) or n < 0 or n > _MAX_N:
        raise BridgeProtocolError(f"bad payload length {n!r}")
    if header.get("dtype", "f64") != "f64":
        raise BridgeProtocolError(f"unsupported dtype {header.get('dtype')!r}")
    payload = np.frombuffer(read_exact(8 * n), dtype="<f8").astype(float) if n else np.empty(0)
    return header, payload


class _SocketTransport:
    def __init__(self, host, port, timeout):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.sock.settimeout(timeout)

    def send(self, data):
        try:
            self.sock.sendall(data)
        except socket.timeout as exc:
            raise BridgeTimeoutError("send timed out") from exc

    def read_exact(self, k):
        buf = bytearray()
        while len(buf) < k:
            try:
                chunk = self.sock.recv(k - len(buf))
            except socket.timeout as exc:
                raise BridgeTimeoutError("receive timed out") from exc
            if not chunk:
                raise BridgeProtocolError("connection closed mid-frame")
            buf.extend(chunk)
        return bytes(buf)

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


class _PipeTransport:
    """Frames over a child process's stdin/stdout."""

    def __init__(self, argv, timeout):
        self.timeout = timeout
        self.proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
        self.sel = selectors.DefaultSelector()
        self.sel.register(self.proc.stdout, selectors.EVENT_READ)

    def send(self, data):
        self.proc.stdin.write(data)
        self.proc.stdin.flush()

    def read_exact(self, k):
        buf = bytearray()
        while len(buf) < k:
            if not self.sel.select(timeout=self.timeout):
                raise BridgeTimeoutError("receive timed out")
            chunk = self.proc.stdout.read1(k - len(buf))
            if not chunk:
                raise BridgeProtocolError("bridge process closed its pipe")
            buf.extend(chunk)
        return bytes(buf)

    def close(self):
        self.sel.close()
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        self.proc.terminate()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()


def _parse_endpoint(endpoint: str):
    host, sep, port = endpoint.rpartition(":")
    if sep and host and port.isdigit():
        return ("tcp", host, int(port))
    return ("spawn", shlex.split(endpoint), None)


class BridgeClient:
    """Serialized QSB1 client; safe to share across chains (one request at a time)."""

    def __init__(self, endpoint: str, timeout: float = 60.0):
        self.endpoint = endpoint
        kind, a, b = _parse_endpoint(endpoint)
        self._transport = _SocketTransport(a, b, timeout) if kind == "tcp" else _PipeTransport(a, timeout)
        self._lock = threading.Lock()
        self._next_id = 0

    def score(self, x, beta: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with self._lock:
            rid = self._next_id
            self._next_id += 1
            self._transport.send(encode_frame("score_request", x, request_id=rid, beta=float(beta)))
            header, payload = decode_frame(self._transport.read_exact)
        if header.get("request_id") != rid:
            raise BridgeProtocolError(
                f"response id {header.get('request_id')!r} does not match request {rid}"
            )
        if header["type"] == "error":
            raise BridgeRemoteError(str(header.get("message", "unspecified remote failure")))
        if header["type"] != "score_response":
            raise BridgeProtocolError(f"unexpected frame type {header['type']!r}")
        if payload.shape != x.shape:
            raise BridgeDimensionError(f"server returned {payload.size} values for {x.size} inputs")
        return payload

    def close(self):
        self._transport.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def remote_score(client: BridgeClient, x, beta: float) -> np.ndarray:
    """Round-trip x and beta through the bridge; bit-exact float64 transport."""
    return client.score(x, beta)


class RemotePrior(PriorScoreModel):
    """PriorScoreModel adapter over a BridgeClient."""

    def __init__(self, client: BridgeClient, dimension: int):
        self._client = client
        self._dimension = dimension

    @property
    def dimension(self) -> int:
        return self._dimension

    def score(self, x, beta: float) -> np.ndarray:
        return self._client.score(x, beta)
