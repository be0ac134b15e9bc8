"""Model roster: one entry per servable key."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import tsfm
from .errors import ModelUnavailable


@dataclass(frozen=True)
class ModelEntry:
    """A servable model: its context budget and point-extraction rule."""

    key: str
    max_context: int
    point_rule: str  # direct | sample_median | sample_mean
    loader: Callable[[int], object]

    def __post_init__(self):
        if self.max_context < 32:
            raise ValueError(f"{self.key}: max_context must be at least 32")
        if self.point_rule not in ("direct", "sample_median", "sample_mean"):
            raise ValueError(f"{self.key}: unknown point rule {self.point_rule!r}")


MODELS: dict[str, ModelEntry] = {
    entry.key: entry
    for entry in (
        ModelEntry(
            key="gbdt",
            max_context=65536,
            point_rule="direct",
            loader=lambda seed: tsfm.GbdtModel(seed=seed),
        ),
        ModelEntry(
            key="chronos-small",
            max_context=512,
            point_rule="sample_median",
            loader=lambda seed: tsfm.ChronosModel(
                "amazon/chronos-t5-small", bolt=False, seed=seed
            ),
        ),
        ModelEntry(
            key="chronos-bolt-small",
            max_context=2048,
            point_rule="direct",
            loader=lambda seed: tsfm.ChronosModel(
                "amazon/chronos-bolt-small", bolt=True, seed=seed
            ),
        ),
        ModelEntry(
            key="timesfm-2",
            max_context=2048,
            point_rule="direct",
            loader=lambda seed: tsfm.TimesFmModel(
                "google/timesfm-2.0-500m-pytorch", seed=seed
            ),
        ),
        ModelEntry(
            key="lag-llama",
            max_context=1024,
            point_rule="sample_median",
            loader=lambda seed: tsfm.LagLlamaModel("time-series-foundation-models/Lag-Llama", seed=seed),
        ),
    )
}


def load_model(key: str, seed: int = 0):
    """Instantiate a registry entry; raises ModelUnavailable with guidance."""
    entry = MODELS.get(key)
    if entry is None:
        raise ModelUnavailable(
            f"unknown model {key!r}; available: {', '.join(sorted(MODELS))}"
        )
    return entry, entry.loader(seed)
