"""Run manifests, run-directory locking and artifact integrity checks."""

import json
import logging
import os
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .. import __version__
from ..utils.formatters import utc_timestamp
from ..utils.hashing import hash_files
from .errors import IntegrityError, NotFoundError, RunLockedError
from .models import RunConfig, RunManifest

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
LOCK_FILE = "run.lock"
DATASET_FILE = "dataset.jsonl"
STAGES = ("ingest", "build", "render", "invoke", "score", "report")

PENDING = "pending"
COMPLETED = "completed"
FAILED = "failed"


def run_directory(output_dir: Union[str, Path], run_id: str) -> Path:
    return Path(output_dir) / run_id


def config_snapshot(config: RunConfig) -> Dict[str, Any]:
    """A JSON-ready copy of a RunConfig."""
    snapshot = asdict(config)
    for key, value in snapshot.items():
        if hasattr(value, "value"):
            snapshot[key] = value.value
    if config.split is not None:
        snapshot["split"] = {"test_fraction": str(config.split.test_fraction), "seed": config.split.seed}
    if isinstance(config.templates, tuple):
        snapshot["templates"] = list(config.templates)
    return snapshot


def new_manifest(config: RunConfig) -> RunManifest:
    return RunManifest(
        run_id=config.run_id,
        config_snapshot=config_snapshot(config),
        artifact_version=__version__,
        started_at=utc_timestamp(),
        stages={stage: PENDING for stage in STAGES},
    )


def write_manifest(manifest: RunManifest, run_dir: Union[str, Path]) -> Path:
    """Write the manifest atomically (temp file, then rename)."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    path = run_dir / MANIFEST_FILE
    tmp = path.with_suffix(".json.tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(asdict(manifest), handle, ensure_ascii=False, indent=2)
        handle.write("\n")
    os.replace(tmp, path)
    return path


def read_manifest(run_dir: Union[str, Path]) -> RunManifest:
    """Read a run's manifest.

    Raises:
        NotFoundError: If the run directory has no manifest.
    """
    path = Path(run_dir) / MANIFEST_FILE
    if not path.is_file():
        raise NotFoundError(f"No run found at {Path(run_dir)} (missing {MANIFEST_FILE})")
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    return RunManifest(**data)


def dataset_files(run_dir: Union[str, Path]) -> List[Path]:
    return [Path(run_dir) / DATASET_FILE]


def dataset_hash(run_dir: Union[str, Path]) -> str:
    return hash_files(dataset_files(run_dir))


def verify_manifest(manifest: RunManifest, run_dir: Union[str, Path], catalog: Optional[str] = None) -> None:
    """Recompute the dataset and catalog hashes and compare them with the manifest.

    Raises:
        IntegrityError: If a recorded hash no longer matches.
    """
    if manifest.dataset_hash is not None:
        actual = dataset_hash(run_dir)
        if actual != manifest.dataset_hash:
            raise IntegrityError(f"Dataset of run {manifest.run_id} changed since it was built "
                                 f"(manifest {manifest.dataset_hash[:12]}, files {actual[:12]})")
    if catalog is not None and manifest.catalog_hash is not None and manifest.catalog_hash != catalog:
        raise IntegrityError(f"Template catalogs changed since run {manifest.run_id} was rendered "
                             f"(manifest {manifest.catalog_hash[:12]}, installed {catalog[:12]})")


class RunLock:
    """Exclusive ownership of a run directory, held through a lock file.

    The lock file is created with O_EXCL and holds the owner's pid. A lock
    left behind by a crashed process must be removed by hand.
    """

    def __init__(self, run_dir: Union[str, Path]):
        self.path = Path(run_dir) / LOCK_FILE
        self.logger = logging.getLogger(__name__)
        self._held = False

    def acquire(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RunLockedError(f"Run directory {self.path.parent} is locked by {self.path}; "
                                 f"remove the file if no other run is active")
        with os.fdopen(fd, "w") as handle:
            handle.write(f"{os.getpid()}\n")
        self._held = True
        self.logger.debug(f"Acquired {self.path}")

    def release(self) -> None:
        if self._held:
            self.path.unlink(missing_ok=True)
            self._held = False
            self.logger.debug(f"Released {self.path}")

    def __enter__(self) -> "RunLock":
        self.acquire()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.release()
