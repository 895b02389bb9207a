"""Exceptions shared across the solver and CLI layers."""


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


class NumericError(Exception):
    """A solve produced non-finite values; carries the trace so far."""

    def __init__(self, message, trace=None, iterations=None):
        super().__init__(message)
        self.trace = trace
        self.iterations = iterations
