"""Core models, errors and run bookkeeping."""

from .errors import (BackendError, CapacityError, ConfigurationError, DataError, HarnessError, IntegrityError,
                     NotFoundError)
from .manifest import RunLock, read_manifest, verify_manifest, write_manifest
from .models import RunConfig, RunManifest, SourceId, Task

__all__ = [
    "BackendError",
    "CapacityError",
    "ConfigurationError",
    "DataError",
    "HarnessError",
    "IntegrityError",
    "NotFoundError",
    "RunConfig",
    "RunLock",
    "RunManifest",
    "SourceId",
    "Task",
    "read_manifest",
    "verify_manifest",
    "write_manifest",
]
