"""Reference adapter for the forecasting wire protocol.

Serves exactly one model per process (memory isolation; compose processes
to scale) over stdin/stdout or a local TCP socket, one JSON object per
line. Ships a gradient-boosting baseline that fits on each request's
context, plus wrappers for pretrained time-series foundation models when
their libraries and checkpoints are installed.
"""

from .gbdt import gbdt_forecast
from .registry import MODELS, ModelEntry, load_model

__version__ = "0.1.0"

__all__ = ["MODELS", "ModelEntry", "load_model", "gbdt_forecast", "__version__"]
