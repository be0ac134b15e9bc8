"""Gradient-boosting baseline behavior."""

import numpy as np
import pytest

from tsfm_adapter.errors import InsufficientHistory
from tsfm_adapter.gbdt import gbdt_forecast


def test_constant_series_gives_constant_forecast():
    got = gbdt_forecast([5.0] * 120, h=6, frequency="D")
    assert np.allclose(got, 5.0, atol=1e-9)


def test_pure_seasonal_matches_seasonal_read_off():
    # noise-free period-24 wave with ample history: the lag features contain
    # exact copies of the target, so boosting should reproduce the seasonal
    # read-off to well under 1% of the amplitude
    pattern = 10.0 + 4.0 * np.sin(2 * np.pi * np.arange(24) / 24)
    wave = np.tile(pattern, 22)  # 528 points
    h = 24
    got = np.array(gbdt_forecast(wave, h=h, frequency="H"))
    oracle = wave[-24:]  # seasonal-naive read-off
    assert np.max(np.abs(got - oracle)) < 0.04


def test_short_context_raises():
    with pytest.raises(InsufficientHistory):
        gbdt_forecast([1.0] * 20, h=14, frequency="D")  # needs h+m+1 = 22


def test_fixed_seed_is_deterministic():
    rng = np.random.default_rng(5)
    context = 50.0 + np.tile([4.0, -4.0, 1.0, -1.0, 2.0, -2.0, 0.0], 30) + rng.normal(
        0, 0.5, 210
    )
    a = gbdt_forecast(context, h=7, frequency="D", seed=3)
    b = gbdt_forecast(context.copy(), h=7, frequency="D", seed=3)
    assert a == b


def test_season_override():
    pattern = np.array([0.0, 5.0, 0.0, -5.0])
    wave = np.tile(pattern, 40)
    got = np.array(gbdt_forecast(wave, h=4, frequency="H", season_length=4))
    assert np.max(np.abs(got - pattern)) < 0.1
