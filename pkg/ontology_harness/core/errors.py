"""Exception hierarchy for the ontology harness.

Every error carries an ``exit_code`` so the CLI can map failures onto
process exit status: 1 for data problems, 2 for configuration problems.
"""

from typing import Iterable, List, Optional, Sequence


class HarnessError(Exception):
    """Base class for all harness errors."""

    exit_code = 1


class DataError(HarnessError):
    """Input data is missing, malformed or inconsistent."""

    exit_code = 1


class ConfigurationError(HarnessError, ValueError):
    """Configuration is invalid or references something that does not exist."""

    exit_code = 2


class SourceUnavailableError(DataError):
    """A knowledge-source file is missing or yields nothing usable."""


class ParseError(DataError):
    """A source file could not be parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line_number: Optional[int] = None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}:{line_number}: " if line_number is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class TaxonomyIntegrityError(DataError):
    """A taxonomy violates its structural invariants."""

    def __init__(self, message: str, cycle: Optional[Sequence[str]] = None):
        self.cycle = list(cycle) if cycle else []
        if self.cycle:
            message = f"{message}: {' -> '.join(self.cycle)}"
        super().__init__(message)


class EmptyDatasetError(DataError):
    """A dataset builder was given nothing to build from."""


class CapacityError(DataError):
    """More items were requested than are available."""

    def __init__(self, message: str, maximum: int):
        self.maximum = maximum
        super().__init__(f"{message} (maximum available: {maximum})")


class CatalogMissingError(DataError):
    """No template catalog exists for a task/source/family combination."""


class RenderError(DataError):
    """A template could not be fully substituted for an item."""

    def __init__(self, message: str, placeholders: Iterable[str] = ()):
        self.placeholders = sorted(set(placeholders))
        if self.placeholders:
            message = f"{message}: {', '.join('{' + p + '}' for p in self.placeholders)}"
        super().__init__(message)


class IntegrityError(DataError):
    """Item ids do not line up between predictions, golds and datasets."""

    def __init__(self, message: str, item_ids: Iterable[str] = ()):
        self.item_ids: List[str] = sorted(set(item_ids))
        if self.item_ids:
            shown = ", ".join(self.item_ids[:20])
            more = f" ... and {len(self.item_ids) - 20} more" if len(self.item_ids) > 20 else ""
            message = f"{message}: {shown}{more}"
        super().__init__(message)


class BackendError(DataError):
    """A model backend returned a non-success response."""

    def __init__(self, message: str, status: Optional[int] = None, body: str = ""):
        self.status = status
        self.body = body[:500]
        detail = f" (status {status})" if status is not None else ""
        if self.body:
            detail += f": {self.body}"
        super().__init__(f"{message}{detail}")


class BackendTimeoutError(BackendError):
    """A model backend did not answer in time."""


class NotFoundError(DataError):
    """A requested run or artifact does not exist."""


class RunLockedError(DataError):
    """Another process holds the lock on a run's output directory."""
