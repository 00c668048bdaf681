"""Exception hierarchy shared by every folia module."""


class FoliaError(Exception):
    """Base class for all errors raised by folia."""


class UsageError(FoliaError, ValueError):
    """Arguments are inconsistent (field mismatch, wrong degree, bad shape)."""


class DegenerateInputError(FoliaError, ValueError):
    """Parameters describe a degenerate object, e.g. a zero multivector."""


class SamplingError(FoliaError, RuntimeError):
    """Random instance generation exhausted its rejection budget."""


class PreconditionError(FoliaError, ValueError):
    """An operation was called outside the range where it is defined."""


class InternalConsistencyError(FoliaError, RuntimeError):
    """A runtime cross-check failed. Carries a diagnostic payload."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
