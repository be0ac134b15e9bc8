"""
Forecasting over the adapter protocol
=====================================

External models (foundation models, gradient boosting) plug in as separate
processes speaking one JSON object per line over stdin/stdout or a TCP
socket. This demo drives the reference echo adapter, whose forecasts
reproduce the built-in naive method bit for bit, then shows the raw wire
traffic.
"""

import json
import subprocess
import sys

import numpy as np

from conformal_ts.bridge import AdapterClient
from conformal_ts.domain import Frequency

endpoint = [sys.executable, "-m", "conformal_ts.echo_adapter"]

with AdapterClient(endpoint) as client:
    info = client.handshake()
    print(f"connected to {info.name!r}: protocol v{info.protocol_version}, "
          f"max_context={info.max_context}, freqs={info.supported_frequencies}")

    context = np.array([101.0, 99.5, 102.25])
    point = client.forecast_values("demo", context, 4, Frequency.HOURLY, 24)
    print(f"context tail {context[-1]} -> forecast {point}")

# The same exchange, by hand: one JSON object per line.
proc = subprocess.Popen(
    endpoint, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True
)
for message in (
    {"v": 1, "type": "hello"},
    {"v": 1, "type": "forecast", "id": "w1", "series": "demo",
     "context": [101.0, 99.5, 102.25], "h": 2, "freq": "H", "m": 24},
    {"v": 1, "type": "forecast", "id": "w2", "series": "demo",
     "context": [], "h": 2, "freq": "H", "m": 24},  # rejected, loop survives
):
    proc.stdin.write(json.dumps(message) + "\n")
    proc.stdin.flush()
    print(f">> {json.dumps(message)}")
    print(f"<< {proc.stdout.readline().strip()}")
proc.stdin.close()
proc.wait()
