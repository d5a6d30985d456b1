"""Content hashes for manifests and cache keys."""

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Union


def stable_hash(value: Any) -> str:
    """SHA-256 over the canonical JSON encoding of ``value``."""
    encoded = json.dumps(value, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(encoded.encode("utf-8")).hexdigest()


def hash_files(paths: Iterable[Union[str, Path]]) -> str:
    """SHA-256 over the names and bytes of ``paths``, taken in sorted name order."""
    digest = hashlib.sha256()
    for path in sorted(Path(p) for p in paths):
        digest.update(path.name.encode("utf-8"))
        digest.update(b"\0")
        with open(path, "rb") as handle:
            for chunk in iter(lambda: handle.read(1 << 20), b""):
                digest.update(chunk)
        digest.update(b"\0")
    return digest.hexdigest()
