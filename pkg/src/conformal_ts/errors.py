"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class ConformalTsError(Exception):
    """Base class for every error raised by this package."""


# --- domain / conformal ---------------------------------------------------


class SeriesTooShort(ConformalTsError):
    """A split would leave the train or calibration side empty."""


class LengthMismatch(ConformalTsError):
    """Two sequences that must align have different lengths."""


class EmptyCalibration(ConformalTsError):
    """No conformity scores available to take a quantile of."""

    def __init__(self, series_id: str | None = None):
        self.series_id = series_id
        msg = "empty calibration set"
        if series_id is not None:
            msg += f" for series {series_id!r}"
        super().__init__(msg)


class ContextTooLong(ConformalTsError):
    """Context length leaves no calibration points."""


class ForecasterFailure(ConformalTsError):
    """A forecaster raised while producing a window forecast."""


# --- forecasters ----------------------------------------------------------


class EmptyContext(ConformalTsError):
    """Forecaster received an empty context."""


class ContextShorterThanSeason(ConformalTsError):
    """Seasonal read-off needs at least one full season of context."""


class ContextTooShort(ConformalTsError):
    """Context below the minimum a forecaster requires."""


# --- bridge ---------------------------------------------------------------


class BridgeError(ConformalTsError):
    """Base class for adapter transport and protocol errors."""


class ProtocolMismatch(BridgeError):
    """Adapter speaks an unsupported protocol version."""


class Unreachable(BridgeError):
    """Adapter endpoint could not be contacted."""

    def __init__(self, endpoint: str, attempts: int, cause: str = ""):
        self.endpoint = endpoint
        self.attempts = attempts
        msg = f"adapter at {endpoint} unreachable after {attempts} attempt(s)"
        if cause:
            msg += f": {cause}"
        super().__init__(msg)


class Timeout(BridgeError):
    """Adapter did not answer within the configured timeout."""


class MalformedResponse(BridgeError):
    """Adapter answered with a response violating the wire contract."""


class AdapterError(BridgeError):
    """Adapter reported an application-level error for a request."""


# --- metrics --------------------------------------------------------------


class EmptyTestSet(ConformalTsError):
    """Aggregation over zero evaluation units."""


class UnitMismatch(ConformalTsError):
    """Model and naive records do not cover the same unit ids."""


class NaiveZeroWidth(ConformalTsError):
    """Naive interval width is zero for a unit; the ratio is undefined."""

    def __init__(self, unit_id: str):
        self.unit_id = unit_id
        super().__init__(f"naive interval width is zero for unit {unit_id!r}")


class NaiveZeroError(ConformalTsError):
    """Summed naive MAE is zero; MASE is undefined."""


# --- datasets -------------------------------------------------------------


class ParseError(ConformalTsError):
    """A CSV row could not be parsed."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


class NonUniformSpacing(ConformalTsError):
    """Timestamps within a series deviate from the declared frequency."""

    def __init__(self, series_id: str, index: int):
        self.series_id = series_id
        self.index = index
        super().__init__(f"series {series_id!r}: non-uniform spacing at index {index}")


class MissingValue(ConformalTsError):
    """NaN or empty value encountered during ingestion."""

    def __init__(self, series_id: str, index: int):
        self.series_id = series_id
        self.index = index
        super().__init__(f"series {series_id!r}: missing value at index {index}")


class DownloadFailed(ConformalTsError):
    """Dataset download failed and there is no usable cache entry."""


class HashMismatch(ConformalTsError):
    """Downloaded file does not match the pinned content hash."""


class ScenarioDoesNotFit(ConformalTsError):
    """Window scenario does not fit inside the source series."""


# --- harness --------------------------------------------------------------


class ConfigError(ConformalTsError):
    """Experiment or manifest configuration is invalid."""


class InsufficientHistory(ConformalTsError):
    """Not enough history to build the requested feature lags."""
