"""Reference adapter: repeats the last context value over the horizon.

Implements the bridge wire format verbatim, so a run through this adapter
must be bitwise-identical to the built-in naive forecaster. Serves on
stdin/stdout by default or on a local TCP port with ``--port``.

    python -m conformal_ts.echo_adapter
    python -m conformal_ts.echo_adapter --port 9123
"""

from __future__ import annotations

import argparse
import json
import math
import socket
import sys
import time

PROTOCOL_VERSION = 1
INFO = {
    "v": PROTOCOL_VERSION,
    "type": "info",
    "name": "echo",
    "max_context": 1_048_576,
    "freqs": ["H", "D", "W", "M"],
}


def _error(request_id: str, msg: str) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "error", "id": request_id, "msg": msg}


def handle_message(line: str) -> dict:
    """Answer one wire message; never raises."""
    try:
        message = json.loads(line)
    except json.JSONDecodeError:
        return _error("", "unparseable request line")
    if not isinstance(message, dict):
        return _error("", "request is not a JSON object")
    request_id = str(message.get("id", ""))
    if message.get("v") != PROTOCOL_VERSION:
        return _error(request_id, f"unsupported protocol version {message.get('v')!r}")

    kind = message.get("type")
    if kind == "hello":
        return INFO
    if kind != "forecast":
        return _error(request_id, f"unsupported message type {kind!r}")

    context = message.get("context")
    horizon = message.get("h")
    if not isinstance(context, list) or not context:
        return _error(request_id, "context must be a nonempty list")
    if not isinstance(horizon, int) or horizon < 1:
        return _error(request_id, "h must be a positive integer")
    try:
        last = float(context[-1])
    except (TypeError, ValueError):
        return _error(request_id, "context entries must be numbers")
    if not math.isfinite(last):
        return _error(request_id, "context entries must be finite")

    started = time.monotonic()
    point = [last] * horizon
    elapsed_ms = int((time.monotonic() - started) * 1000)
    return {
        "v": PROTOCOL_VERSION,
        "type": "result",
        "id": request_id,
        "point": point,
        "ms": elapsed_ms,
    }


def _serve_stream(read_line, write_line) -> None:
    while True:
        line = read_line()
        if not line:
            return
        line = line.strip()
        if not line:
            continue
        write_line(json.dumps(handle_message(line), separators=(",", ":")))


def serve_stdio() -> None:
    def write_line(text: str) -> None:
        sys.stdout.write(text + "\n")
        sys.stdout.flush()

    _serve_stream(sys.stdin.readline, write_line)


def serve_tcp(port: int) -> None:
    with socket.create_server(("127.0.0.1", port)) as server:
        while True:
            conn, _ = server.accept()
            with conn, conn.makefile("rwb") as stream:

                def write_line(text: str) -> None:
                    stream.write(text.encode("utf-8") + b"\n")
                    stream.flush()

                def read_line() -> str:
                    return stream.readline().decode("utf-8")

                try:
                    _serve_stream(read_line, write_line)
                except (OSError, ValueError):
                    continue


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--port", type=int, default=None, help="serve on TCP instead of stdio")
    args = parser.parse_args(argv)
    if args.port is not None:
        serve_tcp(args.port)
    else:
        serve_stdio()
    return 0


if __name__ == "__main__":
    sys.exit(main())
