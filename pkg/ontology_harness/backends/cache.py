"""On-disk response cache: one append-only log per backend plus an index sidecar."""

import json
import logging
import threading
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..core.models import BackendConfig, RawResponse, RenderedPrompt
from ..utils.hashing import stable_hash
from ..utils.jsonl import dumps_line

logger = logging.getLogger(__name__)

INDEX_FLUSH_EVERY = 200


def cache_key(config: BackendConfig, prompt: RenderedPrompt) -> str:
    """SHA-256 over everything that determines a backend's answer to a prompt."""
    return stable_hash([config.model_name, config.kind.value, config.temperature,
                        config.max_output_tokens, prompt.text])


class ResponseCache:
    """Append-only key -> response store for one backend.

    Entries go to ``<cache_dir>/<backend_id>.jsonl``, flushed per write. The
    ``.idx.json`` sidecar maps keys to byte offsets and records the log size
    it was built against; a stale or missing index is rebuilt by scanning the
    log. Unreadable entries are counted in ``corrupt_entries`` and treated as
    misses.
    """

    def __init__(self, cache_dir: Union[str, Path], backend_id: str):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.cache_dir / f"{backend_id}.jsonl"
        self.index_path = self.cache_dir / f"{backend_id}.idx.json"
        self.logger = logging.getLogger(__name__)
        self.corrupt_entries = 0
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()
        self._unsaved = 0
        self._offsets: Dict[str, int] = {}
        self._load_index()
        self._log = open(self.log_path, "ab")

    def __enter__(self) -> "ResponseCache":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def __len__(self) -> int:
        return len(self._offsets)

    def _log_size(self) -> int:
        return self.log_path.stat().st_size if self.log_path.exists() else 0

    def _load_index(self) -> None:
        size = self._log_size()
        if self.index_path.exists():
            try:
                with open(self.index_path, "r", encoding="utf-8") as handle:
                    index = json.load(handle)
                if index.get("log_size") == size:
                    self._offsets = dict(index["offsets"])
                    return
                self.logger.info(f"Cache index {self.index_path} is stale, rebuilding")
            except (ValueError, KeyError, TypeError):
                self.logger.warning(f"Cache index {self.index_path} is unreadable, rebuilding")
        self._rebuild_index()

    def _rebuild_index(self) -> None:
        self._offsets = {}
        if not self.log_path.exists():
            return
        with open(self.log_path, "rb") as handle:
            offset = 0
            for line in handle:
                try:
                    entry = json.loads(line.decode("utf-8"))
                    self._offsets[entry["key"]] = offset
                except (ValueError, KeyError, TypeError):
                    self.corrupt_entries += 1
                offset += len(line)
        if self.corrupt_entries:
            self.logger.warning(f"Ignored {self.corrupt_entries} corrupt entries in {self.log_path}")
        self._save_index()

    def _save_index(self) -> None:
        with open(self.index_path, "w", encoding="utf-8") as handle:
            json.dump({"log_size": self._log_size(), "offsets": self._offsets}, handle)
        self._unsaved = 0

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        with self._lock:
            offset = self._offsets.get(key)
            if offset is None:
                self.misses += 1
                return None
            with open(self.log_path, "rb") as handle:
                handle.seek(offset)
                line = handle.readline()
            try:
                entry = json.loads(line.decode("utf-8"))
                if entry["key"] != key:
                    raise ValueError("offset points at another entry")
            except (ValueError, KeyError, TypeError):
                self.corrupt_entries += 1
                self.misses += 1
                self.logger.warning(f"Corrupt cache entry for key {key[:12]}, calling the backend again")
                del self._offsets[key]
                return None
            self.hits += 1
            return entry

    def put(self, key: str, response: RawResponse) -> None:
        entry = {
            "key": key,
            "text": response.text,
            "ranked_tokens": [list(pair) for pair in response.ranked_tokens] if response.ranked_tokens else None,
            "latency": response.latency,
        }
        with self._lock:
            offset = self._log.tell()
            self._log.write(dumps_line(entry).encode("utf-8"))
            self._log.flush()
            self._offsets[key] = offset
            self._unsaved += 1
            if self._unsaved >= INDEX_FLUSH_EVERY:
                self._save_index()

    def close(self) -> None:
        with self._lock:
            if not self._log.closed:
                self._log.close()
                self._save_index()


def response_from_entry(entry: Dict[str, Any], prompt: RenderedPrompt, backend_id: str) -> RawResponse:
    ranked = entry.get("ranked_tokens")
    return RawResponse(
        item_id=prompt.item_id,
        template_id=prompt.template_id,
        backend_id=backend_id,
        text=entry.get("text"),
        ranked_tokens=tuple((str(token), float(score)) for token, score in ranked) if ranked else None,
        latency=entry.get("latency", 0.0),
        from_cache=True,
    )


def invoke_cached(client, prompt: RenderedPrompt, cache: ResponseCache, family=None) -> RawResponse:
    """Serve a prompt from the cache, or invoke the backend and persist the answer first.

    Args:
        client: A ``BackendClient``.
        prompt: The rendered prompt.
        cache: The backend's response cache.
        family: Optional model family passed through to ``client.invoke``.
    """
    key = cache_key(client.config, prompt)
    entry = cache.get(key)
    if entry is not None:
        try:
            return response_from_entry(entry, prompt, client.config.backend_id)
        except (TypeError, ValueError):
            cache.corrupt_entries += 1
            logger.warning(f"Cache entry for {prompt.item_id} has the wrong shape, calling the backend again")
    response = client.invoke(prompt, family)
    cache.put(key, response)
    return replace(response, from_cache=False)
