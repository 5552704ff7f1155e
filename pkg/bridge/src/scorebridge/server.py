"""Serve score evaluations over QSB1, via TCP or stdio.

One thread per connection; requests on a connection are answered strictly
in arrival order.  A malformed frame gets an error frame carrying whatever
request_id could be recovered; the connection stays open.
"""

import socket
import sys
import threading

from . import framing


def _score_response(model, header, payload):
    rid = header.get("request_id")
    if header.get("type") != "score_request":
        return framing.encode("error", request_id=rid, message=f"unsupported frame type {header.get('type')!r}")
    beta = header.get("beta")
    if not isinstance(beta, (int, float)):
        return framing.encode("error", request_id=rid, message=f"bad beta {beta!r}")
    try:
        score, beta_used = model.score(payload, float(beta))
    except Exception as exc:  # noqa: BLE001 - report, keep serving
        return framing.encode("error", request_id=rid, message=f"{type(exc).__name__}: {exc}")
    if score.shape != payload.shape:
        return framing.encode("error", request_id=rid, message="model returned a wrong-sized score")
    return framing.encode(
        "score_response", score, request_id=rid, beta=beta, beta_used=beta_used
    )


def serve_stream(read_exact, write, model):
    """Frame loop over an abstract byte stream; returns on EOF."""
    while True:
        try:
            header, payload = framing.read_frame(read_exact)
        except EOFError:
            return
        except framing.FrameError as exc:
            write(framing.encode("error", request_id=exc.request_id, message=str(exc)))
            continue
        write(_score_response(model, header, payload))


class BridgeServer:
    """TCP server; use .start()/.stop() or serve_forever()."""

    def __init__(self, host, port, model):
        self.model = model
        self.sock = socket.socket()
        self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.sock.bind((host, port))
        self.sock.listen(16)
        self.host, self.port = self.sock.getsockname()[:2]
        self._accept_thread = None
        self._closing = False

    @property
    def endpoint(self):
        return f"{self.host}:{self.port}"

    def _reader(self, conn):
        def read_exact(k):
            buf = bytearray()
            while len(buf) < k:
                chunk = conn.recv(k - len(buf))
                if not chunk:
                    raise EOFError
                buf.extend(chunk)
            return bytes(buf)

        return read_exact

    def _handle(self, conn):
        with conn:
            try:
                serve_stream(self._reader(conn), conn.sendall, self.model)
            except (ConnectionError, OSError):
                pass

    def _accept_loop(self):
        while not self._closing:
            try:
                conn, _ = self.sock.accept()
            except OSError:
                return
            threading.Thread(target=self._handle, args=(conn,), daemon=True).start()

    def start(self):
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        return self

    def serve_forever(self):
        self.start()
        self._accept_thread.join()

    def stop(self):
        self._closing = True
        self.sock.close()


def serve_stdio(model):
    """Blocking frame loop over stdin/stdout (child-process transport)."""
    inp = sys.stdin.buffer
    out = sys.stdout.buffer

    def read_exact(k):
        buf = bytearray()
        while len(buf) < k:
            chunk = inp.read(k - len(buf))
            if not chunk:
                raise EOFError
            buf.extend(chunk)
        return bytes(buf)

    def write(data):
        out.write(data)
        out.flush()

    serve_stream(read_exact, write, model)
