"""scorebridge: serve a score model over the QSB1 protocol.

Examples:
    scorebridge --echo                               # stdio, test mode
    scorebridge --endpoint 127.0.0.1:7777 --echo     # TCP, test mode
    scorebridge --endpoint 127.0.0.1:7777 --checkpoint model.ts
"""

import argparse
import sys

from .models import load_model
from .server import BridgeServer, serve_stdio


def build_parser():
    p = argparse.ArgumentParser(prog="scorebridge", description=__doc__)
    p.add_argument("--endpoint", default="stdio", help="host:port to bind, or 'stdio' (default)")
    p.add_argument("--checkpoint", default=None, help="TorchScript module with a 'sigmas' buffer")
    p.add_argument("--echo", action="store_true", help="serve -x instead of a checkpoint")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not args.echo and args.checkpoint is None:
        print("error: need --checkpoint or --echo", file=sys.stderr)
        return 2
    try:
        model = load_model(checkpoint=args.checkpoint, echo=args.echo)
    except Exception as exc:  # noqa: BLE001
        print(f"error: cannot load model: {exc}", file=sys.stderr)
        return 2
    if args.endpoint == "stdio":
        try:
            serve_stdio(model)
        except KeyboardInterrupt:
            pass
        return 0
    host, _, port = args.endpoint.rpartition(":")
    if not host or not port.isdigit():
        print(f"error: bad endpoint {args.endpoint!r}", file=sys.stderr)
        return 2
    server = BridgeServer(host, int(port), model)
    print(f"serving {model.name} model on {server.endpoint}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
