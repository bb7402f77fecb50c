"""Exception hierarchy shared across the toolkit.

Every error raised by fairlab derives from :class:`FairlabError` so callers
can catch toolkit failures without swallowing unrelated bugs.
"""


class FairlabError(Exception):
    """Base class for all toolkit errors."""


class ArgumentError(FairlabError, ValueError):
    """A caller-supplied argument is invalid (bad fraction, unknown field, ...)."""


class SchemaError(FairlabError):
    """A dataset spec references columns or features the source does not have."""


class ParseError(FairlabError):
    """A cell could not be parsed as the declared type."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class EmptyDatasetError(FairlabError):
    """Loading or filtering produced a dataset with no rows."""


class AlignmentError(FairlabError):
    """Two datasets expected to be row-aligned are not."""


class UndefinedMetricError(FairlabError):
    """A metric has no defined value on this data (empty group, 0/0, ...)."""


class DegenerateDataError(FairlabError):
    """Data lacks the variation an algorithm needs (single class, empty cell)."""


class NumericalError(FairlabError):
    """A numerical routine failed (divergence, singular matrix)."""


class InfeasibleError(FairlabError):
    """An optimization problem has no feasible point."""


class CapabilityError(FairlabError):
    """The dataset lacks optional information this operation requires."""


class CatalogError(FairlabError):
    """An identifier does not resolve against a known catalog."""

    def __init__(self, message: str, valid: list[str] | None = None):
        super().__init__(message)
        self.valid = list(valid) if valid else []
