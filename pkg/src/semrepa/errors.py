"""Exception taxonomy shared across the pipeline.

Categories map onto the CLI exit codes: usage errors are handled by argparse,
everything else falls into config / state / numeric / format buckets.
"""


class SemrepaError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SemrepaError, ValueError):
    """An argument violates a documented precondition."""


class StateError(SemrepaError, RuntimeError):
    """An operation was invoked in the wrong state (missing checkpoint, wrong variant, ...)."""


class FormatError(SemrepaError, ValueError):
    """A file on disk is corrupt or has the wrong version; names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConfigError(SemrepaError, ValueError):
    """A config file key is unknown or has the wrong type; names the key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class NumericError(SemrepaError, RuntimeError):
    """Training produced a non-finite loss; carries step diagnostics."""


class InternalConsistencyError(SemrepaError, RuntimeError):
    """An invariant the code itself guarantees was violated (e.g. a frozen module grew gradients)."""
