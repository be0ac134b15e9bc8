"""Adapter wire protocol: handshake, validation, failure modes."""

import json
import socket
import subprocess
import sys
import time

import numpy as np
import pytest

from conformal_ts.bridge import (
    PROTOCOL_VERSION,
    AdapterClient,
    ForecastRequest,
    parse_endpoint,
)
from conformal_ts.domain import Frequency
from conformal_ts.errors import (
    AdapterError,
    MalformedResponse,
    ProtocolMismatch,
    Timeout,
    Unreachable,
)

ECHO_CMD = [sys.executable, "-m", "conformal_ts.echo_adapter"]


def _script_adapter(body: str) -> list[str]:
    """An adapter that answers every line with a fixed recipe."""
    code = (
        "import sys, json\n"
        "for line in sys.stdin:\n"
        "    msg = json.loads(line)\n"
        f"{body}\n"
        "    sys.stdout.write(json.dumps(reply) + '\\n')\n"
        "    sys.stdout.flush()\n"
    )
    return [sys.executable, "-c", code]


GOOD_INFO = (
    "    reply = {'v': 1, 'type': 'info', 'name': 't', 'max_context': 512,"
    " 'freqs': ['H']} if msg['type'] == 'hello' else None"
)


def _request(client, context, horizon=3, series="s"):
    return ForecastRequest(
        request_id=client.next_request_id(),
        series_id=series,
        context=tuple(context),
        horizon=horizon,
        frequency=Frequency.HOURLY,
        season_length=24,
    )


def test_parse_endpoint_forms():
    assert parse_endpoint(["python", "-m", "x"]) == ("cmd", ["python", "-m", "x"])
    assert parse_endpoint("localhost:9000") == ("tcp", "localhost", 9000)
    assert parse_endpoint("python -m conformal_ts.echo_adapter") == (
        "cmd",
        ["python", "-m", "conformal_ts.echo_adapter"],
    )


def test_handshake_and_forecast_via_stdio():
    with AdapterClient(ECHO_CMD) as client:
        info = client.handshake()
        assert info.name == "echo"
        assert info.protocol_version == PROTOCOL_VERSION
        assert info.max_context >= 512
        response = client.forecast_remote(_request(client, [1.0, 2.0, 7.25]))
        assert response.point == (7.25, 7.25, 7.25)
        assert response.elapsed_ms >= 0
        assert len(client.latencies) == 1


def test_wire_format_is_bit_exact():
    request = ForecastRequest(
        request_id="q000001",
        series_id="s1",
        context=(1.0, 2.5),
        horizon=2,
        frequency=Frequency.DAILY,
        season_length=7,
    )
    assert json.dumps(request.to_wire(), separators=(",", ":")) == (
        '{"v":1,"type":"forecast","id":"q000001","series":"s1",'
        '"context":[1.0,2.5],"h":2,"freq":"D","m":7}'
    )


def test_forecast_requires_handshake():
    with AdapterClient(ECHO_CMD) as client:
        with pytest.raises(ProtocolMismatch):
            client.forecast_remote(_request(client, [1.0]))


def test_protocol_version_mismatch():
    cmd = _script_adapter(
        "    reply = {'v': 2, 'type': 'info', 'name': 't', 'max_context': 512,"
        " 'freqs': ['H']}"
    )
    with AdapterClient(cmd) as client:
        with pytest.raises(ProtocolMismatch):
            client.handshake()


def test_max_context_below_floor():
    cmd = _script_adapter(
        "    reply = {'v': 1, 'type': 'info', 'name': 't', 'max_context': 16,"
        " 'freqs': ['H']}"
    )
    with AdapterClient(cmd) as client:
        with pytest.raises(ProtocolMismatch):
            client.handshake()


def test_unreachable_tcp_reports_attempts():
    with pytest.raises(Unreachable) as err:
        AdapterClient("127.0.0.1:1")  # reserved port, nothing listens
    assert err.value.attempts == 3


def test_unreachable_command():
    with pytest.raises(Unreachable):
        AdapterClient(["definitely-not-a-real-binary-m41"])


def test_wrong_length_point_is_malformed():
    cmd = _script_adapter(
        GOOD_INFO
        + "\n"
        + "    if msg['type'] == 'forecast':\n"
        + "        reply = {'v': 1, 'type': 'result', 'id': msg['id'],"
        " 'point': [1.0], 'ms': 0}"
    )
    with AdapterClient(cmd) as client:
        client.handshake()
        with pytest.raises(MalformedResponse):
            client.forecast_remote(_request(client, [1.0, 2.0], horizon=3))


def test_nan_point_is_malformed():
    cmd = _script_adapter(
        GOOD_INFO
        + "\n"
        + "    if msg['type'] == 'forecast':\n"
        + "        reply = {'v': 1, 'type': 'result', 'id': msg['id'],"
        " 'point': [float('nan')] * msg['h'], 'ms': 0}"
    )
    with AdapterClient(cmd) as client:
        client.handshake()
        with pytest.raises(MalformedResponse):
            client.forecast_remote(_request(client, [1.0]))


def test_wrong_id_echo_is_malformed():
    cmd = _script_adapter(
        GOOD_INFO
        + "\n"
        + "    if msg['type'] == 'forecast':\n"
        + "        reply = {'v': 1, 'type': 'result', 'id': 'other',"
        " 'point': [0.0] * msg['h'], 'ms': 0}"
    )
    with AdapterClient(cmd) as client:
        client.handshake()
        with pytest.raises(MalformedResponse):
            client.forecast_remote(_request(client, [1.0]))


def test_adapter_error_message_surfaces():
    cmd = _script_adapter(
        GOOD_INFO
        + "\n"
        + "    if msg['type'] == 'forecast':\n"
        + "        reply = {'v': 1, 'type': 'error', 'id': msg['id'],"
        " 'msg': 'model exploded'}"
    )
    with AdapterClient(cmd) as client:
        client.handshake()
        with pytest.raises(AdapterError, match="model exploded"):
            client.forecast_remote(_request(client, [1.0]))


def test_timeout_on_silent_adapter():
    cmd = [sys.executable, "-c", "import time\ntime.sleep(30)"]
    client = AdapterClient(cmd, timeout_ms=200)
    try:
        started = time.monotonic()
        with pytest.raises(Timeout):
            client.handshake()
        assert time.monotonic() - started < 5
    finally:
        client.close()


def test_echo_adapter_over_tcp():
    port = _free_port()
    server = subprocess.Popen(
        [*ECHO_CMD, "--port", str(port)], stderr=subprocess.DEVNULL
    )
    try:
        _wait_for_port(port)
        with AdapterClient(f"127.0.0.1:{port}") as client:
            info = client.handshake()
            assert info.name == "echo"
            response = client.forecast_remote(_request(client, [5.0, -1.5], horizon=4))
            assert response.point == (-1.5, -1.5, -1.5, -1.5)
    finally:
        server.kill()
        server.wait()


def test_echo_adapter_recovers_from_malformed_line():
    from conformal_ts.echo_adapter import handle_message

    bad = handle_message("this is not json")
    assert bad["type"] == "error"
    good = handle_message(
        json.dumps({"v": 1, "type": "forecast", "id": "a", "context": [3.0], "h": 2})
    )
    assert good == {"v": 1, "type": "result", "id": "a", "point": [3.0, 3.0], "ms": 0}


def test_request_ids_pair_one_to_one():
    with AdapterClient(ECHO_CMD) as client:
        client.handshake()
        ids = set()
        for value in np.linspace(0.0, 1.0, 7):
            request = _request(client, [float(value)], horizon=1)
            response = client.forecast_remote(request)
            assert response.request_id == request.request_id
            ids.add(request.request_id)
        assert len(ids) == 7


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_for_port(port: int, timeout: float = 10.0) -> None:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                return
        except OSError:
            time.sleep(0.05)
    raise RuntimeError(f"port {port} never came up")
