"""Shared exception types."""


class NonFiniteError(ArithmeticError):
    """A public operation produced (or received) NaN/Inf values."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss; the run is aborted rather than clipped."""


class StaleCacheError(ValueError):
    """A backward pass was handed a cache that does not match its forward call."""


class DatasetFormatError(ValueError):
    """A binary dataset/checkpoint file failed validation (magic, version,
    truncation or checksum)."""
