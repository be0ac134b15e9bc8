"""The line protocol loop.

One JSON object per line: hello -> info, forecast -> result or error.
A bad request produces an error reply and the loop continues; nothing a
single request contains can crash the process.
"""

from __future__ import annotations

import json
import math
import socket
import sys
import time

from .errors import AdapterFault
from .registry import ModelEntry

PROTOCOL_VERSION = 1
FREQ_CODES = ("H", "D", "W", "M")


def _error(request_id: str, msg: str) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "error", "id": request_id, "msg": msg}


def _info(entry: ModelEntry, seed: int) -> dict:
    return {
        "v": PROTOCOL_VERSION,
        "type": "info",
        "name": entry.key,
        "max_context": entry.max_context,
        "freqs": list(FREQ_CODES),
        "point_rule": entry.point_rule,
        "seed": seed,
    }


def handle_message(line: str, entry: ModelEntry, model, seed: int) -> dict:
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
        return _info(entry, seed)
    if kind != "forecast":
        return _error(request_id, f"unsupported message type {kind!r}")

    context = message.get("context")
    horizon = message.get("h")
    freq = message.get("freq")
    season = message.get("m")
    if not isinstance(context, list) or not context:
        return _error(request_id, "context must be a nonempty list")
    if len(context) > entry.max_context:
        return _error(
            request_id,
            f"context of {len(context)} exceeds max_context {entry.max_context}",
        )
    if not isinstance(horizon, int) or horizon < 1:
        return _error(request_id, "h must be a positive integer")
    if freq not in FREQ_CODES:
        return _error(request_id, f"freq must be one of {'/'.join(FREQ_CODES)}")
    if not isinstance(season, int) or season < 1:
        return _error(request_id, "m must be a positive integer")
    try:
        values = [float(v) for v in context]
    except (TypeError, ValueError):
        return _error(request_id, "context entries must be numbers")
    if not all(math.isfinite(v) for v in values):
        return _error(request_id, "context entries must be finite")

    started = time.monotonic()
    try:
        point = model.forecast(values, horizon, freq, season)
    except AdapterFault as exc:
        return _error(request_id, str(exc))
    except Exception as exc:  # a single bad request must not kill the loop
        return _error(request_id, f"{type(exc).__name__}: {exc}")
    elapsed_ms = int((time.monotonic() - started) * 1000)

    if len(point) != horizon or not all(math.isfinite(v) for v in point):
        return _error(request_id, "model produced an invalid point forecast")
    return {
        "v": PROTOCOL_VERSION,
        "type": "result",
        "id": request_id,
        "point": [float(v) for v in point],
        "ms": elapsed_ms,
    }


def _serve_stream(read_line, write_line, entry, model, seed) -> None:
    while True:
        line = read_line()
        if not line:
            return
        line = line.strip()
        if not line:
            continue
        reply = handle_message(line, entry, model, seed)
        write_line(json.dumps(reply, separators=(",", ":")))


def serve_stdio(entry: ModelEntry, model, seed: int) -> None:
    def write_line(text: str) -> None:
        sys.stdout.write(text + "\n")
        sys.stdout.flush()

    _serve_stream(sys.stdin.readline, write_line, entry, model, seed)


def serve_tcp(entry: ModelEntry, model, seed: int, port: int) -> None:
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
                    _serve_stream(read_line, write_line, entry, model, seed)
                except (OSError, ValueError):
                    continue
