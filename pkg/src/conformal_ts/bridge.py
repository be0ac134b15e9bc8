"""Wire protocol and client for external forecasters.

One JSON object per line, UTF-8, over the adapter's stdin/stdout when
spawned as a child process or over a local TCP socket when given host:port.

    request   {"v":1,"type":"forecast","id":..,"series":..,"context":[..],
               "h":..,"freq":"H|D|W|M","m":..}
    response  {"v":1,"type":"result","id":..,"point":[..],"ms":..}
              {"v":1,"type":"error","id":..,"msg":..}
    handshake {"v":1,"type":"hello"} <-> {"v":1,"type":"info","name":..,
               "max_context":..,"freqs":["H","D","W","M"]}

The client serializes writes per connection: one in-flight request at a
time. Open several clients to parallelize.
"""

from __future__ import annotations

import itertools
import json
import os
import select
import shlex
import socket
import subprocess
import threading
import time
from dataclasses import dataclass

import numpy as np

from .domain import Frequency
from .errors import (
    AdapterError,
    MalformedResponse,
    ProtocolMismatch,
    Timeout,
    Unreachable,
)

__all__ = [
    "PROTOCOL_VERSION",
    "ForecastRequest",
    "ForecastResponse",
    "AdapterInfo",
    "AdapterClient",
    "parse_endpoint",
]

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT_MS = 120_000
MIN_MAX_CONTEXT = 32
_CONNECT_ATTEMPTS = 3


@dataclass(frozen=True)
class ForecastRequest:
    """One window's forecast request."""

    request_id: str
    series_id: str
    context: tuple[float, ...]
    horizon: int
    frequency: Frequency
    season_length: int

    def to_wire(self) -> dict:
        return {
            "v": PROTOCOL_VERSION,
            "type": "forecast",
            "id": self.request_id,
            "series": self.series_id,
            "context": list(self.context),
            "h": self.horizon,
            "freq": self.frequency.code,
            "m": self.season_length,
        }


@dataclass(frozen=True)
class ForecastResponse:
    """A validated point forecast from an adapter."""

    request_id: str
    point: tuple[float, ...]
    elapsed_ms: int


@dataclass(frozen=True)
class AdapterInfo:
    """What an adapter advertises during the handshake."""

    name: str
    supported_frequencies: tuple[str, ...]
    max_context: int
    protocol_version: int


def parse_endpoint(endpoint):
    """Normalize an endpoint into ("tcp", host, port) or ("cmd", argv).

    Accepts an argv list, a "host:port" string, or a command string.
    """
    if isinstance(endpoint, (list, tuple)):
        return ("cmd", [str(a) for a in endpoint])
    text = str(endpoint).strip()
    host, sep, port = text.rpartition(":")
    if sep and host and " " not in text and port.isdigit():
        return ("tcp", host, int(port))
    argv = shlex.split(text)
    if not argv:
        raise Unreachable(text, 0, "empty endpoint")
    return ("cmd", argv)


class _Channel:
    """Line-delimited byte channel over a pipe pair or a socket."""

    def __init__(self, read_fd: int, write, closer):
        self._read_fd = read_fd
        self._write = write
        self._closer = closer
        self._buf = b""

    def send_line(self, payload: bytes) -> None:
        self._write(payload + b"\n")

    def recv_line(self, timeout_ms: int) -> bytes:
        deadline = time.monotonic() + timeout_ms / 1000.0
        while True:
            idx = self._buf.find(b"\n")
            if idx >= 0:
                line, self._buf = self._buf[:idx], self._buf[idx + 1 :]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise Timeout(f"no response within {timeout_ms} ms")
            ready, _, _ = select.select([self._read_fd], [], [], remaining)
            if not ready:
                raise Timeout(f"no response within {timeout_ms} ms")
            chunk = os.read(self._read_fd, 65536)
            if not chunk:
                raise MalformedResponse("adapter closed the connection")
            self._buf += chunk

    def close(self) -> None:
        self._closer()


def _open_channel(endpoint) -> tuple[_Channel, str]:
    parsed = parse_endpoint(endpoint)
    if parsed[0] == "cmd":
        argv = parsed[1]
        label = " ".join(argv)
        try:
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise Unreachable(label, 1, str(exc)) from exc

        def write(data: bytes) -> None:
            proc.stdin.write(data)
            proc.stdin.flush()

        def close() -> None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()

        return _Channel(proc.stdout.fileno(), write, close), label

    _, host, port = parsed
    label = f"{host}:{port}"
    last_error = ""
    for attempt in range(1, _CONNECT_ATTEMPTS + 1):
        try:
            sock = socket.create_connection((host, port), timeout=5.0)
            sock.setblocking(True)
            return _Channel(sock.fileno(), sock.sendall, sock.close), label
        except OSError as exc:
            last_error = str(exc)
            if attempt < _CONNECT_ATTEMPTS:
                time.sleep(0.1 * attempt)
    raise Unreachable(label, _CONNECT_ATTEMPTS, last_error)


@dataclass
class _LatencyRecord:
    request_id: str
    adapter_ms: int
    wall_ms: float


class AdapterClient:
    """Protocol client bound to one adapter connection.

    Perform :meth:`handshake` once, then issue forecasts; each response is
    validated (length, finiteness, id echo) before it is accepted.
    """

    def __init__(self, endpoint, timeout_ms: int = DEFAULT_TIMEOUT_MS):
        self._channel, self.endpoint = _open_channel(endpoint)
        self.timeout_ms = int(timeout_ms)
        self.info: AdapterInfo | None = None
        self.latencies: list[_LatencyRecord] = []
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    # -- plumbing ---------------------------------------------------------

    def _roundtrip(self, message: dict, timeout_ms: int | None = None) -> dict:
        payload = json.dumps(message, separators=(",", ":")).encode("utf-8")
        with self._lock:
            self._channel.send_line(payload)
            line = self._channel.recv_line(timeout_ms or self.timeout_ms)
        try:
            reply = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedResponse(f"undecodable reply: {exc}") from exc
        if not isinstance(reply, dict):
            raise MalformedResponse("reply is not a JSON object")
        return reply

    def next_request_id(self) -> str:
        return f"q{next(self._ids):06d}"

    # -- protocol ----------------------------------------------------------

    def handshake(self) -> AdapterInfo:
        """Exchange hello/info and negotiate the protocol version."""
        reply = self._roundtrip({"v": PROTOCOL_VERSION, "type": "hello"})
        if reply.get("v") != PROTOCOL_VERSION:
            raise ProtocolMismatch(
                f"adapter speaks protocol {reply.get('v')!r}, "
                f"client requires {PROTOCOL_VERSION}"
            )
        if reply.get("type") != "info":
            raise MalformedResponse(f"expected info reply, got {reply.get('type')!r}")
        try:
            info = AdapterInfo(
                name=str(reply["name"]),
                supported_frequencies=tuple(reply["freqs"]),
                max_context=int(reply["max_context"]),
                protocol_version=int(reply["v"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"incomplete info reply: {exc}") from exc
        if info.max_context < MIN_MAX_CONTEXT:
            raise ProtocolMismatch(
                f"adapter max_context {info.max_context} below the "
                f"required {MIN_MAX_CONTEXT}"
            )
        self.info = info
        return info

    def forecast_remote(
        self, request: ForecastRequest, timeout_ms: int | None = None
    ) -> ForecastResponse:
        """Send one forecast request and validate the reply."""
        if self.info is None:
            raise ProtocolMismatch("handshake has not completed")
        started = time.monotonic()
        reply = self._roundtrip(request.to_wire(), timeout_ms)
        wall_ms = (time.monotonic() - started) * 1000.0

        if reply.get("v") != PROTOCOL_VERSION:
            raise MalformedResponse(f"bad protocol version {reply.get('v')!r}")
        if reply.get("id") != request.request_id:
            raise MalformedResponse(
                f"response id {reply.get('id')!r} does not echo "
                f"request id {request.request_id!r}"
            )
        kind = reply.get("type")
        if kind == "error":
            raise AdapterError(str(reply.get("msg", "unspecified adapter error")))
        if kind != "result":
            raise MalformedResponse(f"unexpected reply type {kind!r}")

        point = reply.get("point")
        if not isinstance(point, list) or len(point) != request.horizon:
            got = len(point) if isinstance(point, list) else type(point).__name__
            raise MalformedResponse(
                f"point of length {got}, expected {request.horizon}"
            )
        try:
            values = tuple(float(p) for p in point)
        except (TypeError, ValueError) as exc:
            raise MalformedResponse(f"non-numeric point entries: {exc}") from exc
        if not np.isfinite(values).all():
            raise MalformedResponse("point contains NaN/inf values")
        ms = reply.get("ms", 0)
        if not isinstance(ms, int) or ms < 0:
            raise MalformedResponse(f"bad ms field {ms!r}")

        self.latencies.append(_LatencyRecord(request.request_id, ms, wall_ms))
        return ForecastResponse(
            request_id=request.request_id, point=values, elapsed_ms=ms
        )

    def forecast_values(
        self,
        series_id: str,
        context,
        horizon: int,
        frequency: Frequency,
        season_length: int,
        timeout_ms: int | None = None,
    ) -> np.ndarray:
        """Convenience wrapper returning the point forecast as an array."""
        request = ForecastRequest(
            request_id=self.next_request_id(),
            series_id=series_id,
            context=tuple(float(v) for v in np.asarray(context, dtype=np.float64)),
            horizon=int(horizon),
            frequency=frequency,
            season_length=int(season_length),
        )
        response = self.forecast_remote(request, timeout_ms)
        return np.asarray(response.point, dtype=np.float64)

    def close(self) -> None:
        self._channel.close()

    def __enter__(self) -> "AdapterClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
