"""Exception types shared across the toolkit."""


class AceminerError(Exception):
    """Base class for all errors raised by this package."""


class OntologyParseError(AceminerError):
    """Raised when an ontology document cannot be parsed.

    Carries the 1-based ``line`` and 0-based ``column`` of the failure when
    the underlying XML parser reports a position.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SubclassCycleError(AceminerError):
    """Raised when the asserted subclass relation contains a cycle."""

    def __init__(self, member_iri: str):
        super().__init__(f"subclass cycle detected involving class {member_iri!r}")
        self.member_iri = member_iri


class UnknownClassError(AceminerError):
    """Raised when an IRI is not a class of the graph under inspection."""


class LexiconFormatError(AceminerError):
    """Raised for malformed lexicon lines; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InvalidQueryError(AceminerError):
    """Raised when a match query normalizes to the empty string."""


class RemoteMatchError(AceminerError):
    """Raised when the remote matcher fails; carries the offending label."""

    def __init__(self, label: str, cause: str):
        super().__init__(f"remote match failed for label {label!r}: {cause}")
        self.label = label
        self.cause = cause


class CacheError(AceminerError):
    """Raised when a matcher cache entry cannot be read or written."""


class CurationError(AceminerError):
    """Raised for invalid curation decisions (unknown class, unlisted CUI, ...)."""


class SchemaError(AceminerError):
    """Raised when a serialized artifact violates its documented schema."""


class EmptyTerminologyError(AceminerError):
    """Raised when a terminology compiles to zero usable patterns."""


class CorpusFormatError(AceminerError):
    """Raised when a corpus file is unusable before streaming starts."""
