"""Exception hierarchy shared across the package.

Callers are expected to branch on these types: the tracing loop treats a
zero-probability event differently from a malformed input, and the CLI
maps the classes onto distinct exit codes.
"""

from __future__ import annotations


class IdTraceError(Exception):
    """Base class for all errors raised by this package."""

    #: machine-readable code used by the HTTP service and the CLI
    code = "internal_error"


class CsvFormatError(IdTraceError):
    """Structurally malformed CSV input (wrong arity, bad header)."""

    code = "csv_format"

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class ValidationError(IdTraceError):
    """Input violates a declared invariant (bad code, duplicate id, ...)."""

    code = "validation"


class UsageError(IdTraceError):
    """The caller broke a call-sequence contract (e.g. observing twice)."""

    code = "usage"


class EmptySearchSpaceError(IdTraceError):
    """An operation that needs a nonempty candidate set received none."""

    code = "empty_search_space"


class ProbabilityZeroError(IdTraceError):
    """A value's frequency in the candidate set is zero, so its
    information content is unbounded and the quantity is undefined."""

    code = "probability_zero"

    def __init__(self, attribute_id: int, value: int, message: str | None = None):
        super().__init__(
            message
            or f"value {value} of attribute {attribute_id} has zero probability "
            "in the candidate set"
        )
        self.attribute_id = attribute_id
        self.value = value


class UndefinedAttributeError(IdTraceError):
    """Every surviving candidate is missing the attribute, so it has no
    value distribution to measure."""

    code = "undefined_attribute"


class InconsistentObservationsError(IdTraceError):
    """The observation set filters the candidate set down to nothing."""

    code = "inconsistent_observations"


class InvalidSetError(IdTraceError):
    """An attribute set references attributes the target has no value for."""

    code = "invalid_set"


class NotDistinguishableError(IdTraceError):
    """No attribute set can separate the target from the survivors
    (duplicate rows). Carries the surviving candidate set."""

    code = "not_distinguishable"

    def __init__(self, message: str, survivors=None):
        super().__init__(message)
        self.survivors = survivors


class ResourceLimitError(IdTraceError):
    """A configured enumeration or retry budget was exceeded."""

    code = "resource_limit"


class GenerationError(IdTraceError):
    """The synthetic generator could not satisfy its constraints."""

    code = "generation"
