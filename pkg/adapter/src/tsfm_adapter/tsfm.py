"""Wrappers around pretrained time-series foundation models.

Each wrapper imports its library lazily and downloads/loads the released
checkpoint on first use; serving fails at startup with a clear message when
the dependency is missing. Sampling-based models pin their sampler seed and
declare the point-extraction rule (sample median) so runs are reproducible
up to the backend's own nondeterminism.
"""

from __future__ import annotations

import numpy as np

from .errors import ModelUnavailable


class ChronosModel:
    """Chronos checkpoints (token-sampling family and the Bolt variant).

    Classic Chronos samples future token trajectories; the point forecast is
    the per-step sample median. Bolt checkpoints emit quantiles directly and
    the 0.5 quantile is used.
    """

    def __init__(self, checkpoint: str, bolt: bool, seed: int = 0):
        try:
            import torch  # noqa: F401
            from chronos import BaseChronosPipeline
        except ImportError as exc:
            raise ModelUnavailable(
                f"chronos backend not installed ({exc}); "
                "pip install tsfm-adapter[chronos]"
            ) from exc
        import torch

        torch.manual_seed(seed)
        self.seed = seed
        self.bolt = bolt
        self.pipeline = BaseChronosPipeline.from_pretrained(checkpoint)

    def forecast(self, context, h: int, freq: str, m: int) -> list[float]:
        import torch

        tensor = torch.tensor(np.asarray(context, dtype=np.float32))
        quantiles, _ = self.pipeline.predict_quantiles(
            context=tensor, prediction_length=h, quantile_levels=[0.5]
        )
        return [float(v) for v in quantiles[0, :, 0].numpy()]


class TimesFmModel:
    """TimesFM checkpoints; deterministic point output, used directly."""

    def __init__(self, checkpoint: str, seed: int = 0):
        try:
            import timesfm
        except ImportError as exc:
            raise ModelUnavailable(
                f"timesfm backend not installed ({exc}); "
                "pip install tsfm-adapter[timesfm]"
            ) from exc
        self.model = timesfm.TimesFm.from_pretrained(checkpoint)

    def forecast(self, context, h: int, freq: str, m: int) -> list[float]:
        point, _ = self.model.forecast(
            [np.asarray(context, dtype=np.float32)], freq=[0]
        )
        return [float(v) for v in point[0][:h]]


class LagLlamaModel:
    """Lag-Llama checkpoint; point forecast is the sample median."""

    def __init__(self, checkpoint: str, seed: int = 0):
        raise ModelUnavailable(
            "lag-llama serving needs the lag-llama repository and checkpoint; "
            "install it and register a loader here"
        )


class GbdtModel:
    """Per-request gradient boosting (no pretrained state)."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def forecast(self, context, h: int, freq: str, m: int) -> list[float]:
        from .gbdt import gbdt_forecast

        return gbdt_forecast(context, h, freq, season_length=m, seed=self.seed)
