"""Helpers shared by the knowledge-source parsers."""

import logging
import unicodedata
from collections import Counter
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from ..core.errors import SourceUnavailableError
from ..core.models import Partition, SourceId, TermRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PROGRESS_EVERY = 1_000_000


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def require_file(path: Optional[PathLike], what: str) -> Path:
    """Return ``path`` as a Path, raising SourceUnavailableError when it does not exist."""
    if path is None:
        raise SourceUnavailableError(f"No path configured for {what}")
    path = Path(path)
    if not path.is_file():
        raise SourceUnavailableError(f"{what} not found: {path}")
    return path


class RecordMerger:
    """Collects raw term observations and merges those a model would see identically.

    Observations sharing partition, surface form and context sentence become
    one TermRecord whose gold types are the union; the record id derives from
    the smallest raw id in the group.
    """

    def __init__(self, source_id: SourceId):
        self.source_id = source_id
        self._groups: Dict[Tuple[Optional[Partition], str, Optional[str]], Tuple[str, set]] = {}

    def add(self, raw_id: str, surface_form: str, gold_types: Iterable[str],
            context_sentence: Optional[str] = None, partition: Optional[Partition] = None) -> None:
        key = (partition, surface_form, context_sentence)
        current = self._groups.get(key)
        if current is None:
            self._groups[key] = (raw_id, set(gold_types))
        else:
            first_id, types = current
            types.update(gold_types)
            if raw_id < first_id:
                self._groups[key] = (raw_id, types)

    def __len__(self) -> int:
        return len(self._groups)

    def records(self) -> Tuple[TermRecord, ...]:
        records: List[TermRecord] = []
        for (partition, surface_form, sentence), (raw_id, types) in self._groups.items():
            prefix = f"{self.source_id.value}:{partition.value}:" if partition else f"{self.source_id.value}:"
            records.append(TermRecord(
                term_id=f"{prefix}{raw_id}",
                surface_form=surface_form,
                gold_types=frozenset(types),
                source_id=self.source_id,
                context_sentence=sentence,
                partition=partition,
            ))
        records.sort(key=lambda record: record.term_id)
        return tuple(records)


def log_warnings(source: str, warnings: Counter) -> Dict[str, int]:
    """Log counted warnings once per source and return them as a plain dict."""
    for name, count in sorted(warnings.items()):
        if count:
            logger.warning(f"{source}: {count} {name.replace('_', ' ')}")
    return {name: count for name, count in sorted(warnings.items()) if count}


def inventory_of(records: Iterable[TermRecord]) -> FrozenSet[str]:
    types = set()
    for record in records:
        types.update(record.gold_types)
    return frozenset(types)
