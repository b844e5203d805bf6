"""Exception hierarchy shared across the package."""

from __future__ import annotations


class RegionRagError(Exception):
    """Base class for all package errors."""


class CorpusError(RegionRagError):
    """A corpus file could not be ingested.

    ``lines`` holds the 1-based line numbers involved (one for a parse or
    schema problem, two for a duplicate id).
    """

    def __init__(self, message: str, lines: tuple[int, ...] = ()):
        super().__init__(message)
        self.lines = lines


class DimensionMismatchError(RegionRagError):
    pass


class ProviderMismatchError(RegionRagError):
    pass


class TransportError(RegionRagError):
    """A remote call failed. ``retryable`` is set for transient failures."""

    def __init__(self, message: str, status: int | None = None, retryable: bool = True):
        super().__init__(message)
        self.status = status
        self.retryable = retryable


class EmptyAnswerError(RegionRagError):
    pass


class IndexNotBuiltError(RegionRagError):
    pass


class IndexFormatError(RegionRagError):
    pass


class ChecksumError(IndexFormatError):
    pass


class VersionError(IndexFormatError):
    pass
