"""Error types shared across the package."""


class ContraqaError(Exception):
    """Base class for all package errors."""


class CorpusFormatError(ContraqaError):
    """Corpus file is malformed (bad JSON line, wrong field type, duplicate id)."""


class DatasetValidationError(ContraqaError):
    """Dataset file violates the format or its referential invariants."""


class IndexFormatError(ContraqaError):
    """Persisted index artifact is missing, corrupt, or version-incompatible."""


class TransportError(ContraqaError):
    """A remote model-server call failed; no partial results were kept.

    ``offset`` is the index of the first item of the failing batch within the
    caller's input sequence.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset
