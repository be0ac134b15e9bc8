"""Adapter-side errors; the protocol loop turns them into error replies."""


class AdapterFault(Exception):
    """Base class for request-level failures."""


class InsufficientHistory(AdapterFault):
    """Context too short to build the requested lag features."""


class ModelUnavailable(Exception):
    """Model library or checkpoint is not installed; fails at startup."""
