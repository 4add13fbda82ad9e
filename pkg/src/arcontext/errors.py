"""Exception hierarchy shared by every arcontext module."""

from __future__ import annotations


class ArContextError(Exception):
    """Base class for all engine errors."""


class ValidationError(ArContextError):
    """Input failed a contract check. ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# context_core
class DuplicateId(ValidationError):
    pass


class InvalidTaxonomyPath(ValidationError):
    pass


class PersistentNotExtracted(ValidationError):
    pass


class UnknownComponent(ValidationError):
    pass


class ValueOutOfDomain(ValidationError):
    pass


class InvalidScenario(ValidationError):
    pass


# spatial
class GazeVertical(ArContextError):
    pass


# rules
class ParseError(ValidationError):
    pass


class UnknownDimension(ValidationError):
    pass


class ImpactOutOfRange(ValidationError):
    pass


class DuplicatePrincipleId(ValidationError):
    pass


class MissingComponent(ValidationError):
    pass


# adapt
class UnknownEntity(ValidationError):
    pass


# harness
class SchemaError(ValidationError):
    """Trace CSV problem, pinned to a 1-based data row and a column name."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(message, path=", ".join(where))


class ConfigError(ValidationError):
    pass
