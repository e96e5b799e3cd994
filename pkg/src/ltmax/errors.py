"""Exception types shared across the toolkit."""


class ParameterError(ValueError):
    """An argument is outside its documented domain."""


class EdgeListFormatError(ValueError):
    """An edge-list or threshold file failed validation; message names the line."""


class UsageError(RuntimeError):
    """An operation was invoked in a state it does not support."""
