"""Line-delimited JSON helpers shared by corpus, dataset, cache and report files."""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Union

from ..core.errors import ParseError, SourceUnavailableError

PathLike = Union[str, Path]


def dumps_line(record: Dict[str, Any]) -> str:
    """Serialize one record as a JSON line. Key order is preserved as given."""
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": ")) + "\n"


def write_jsonl(records: Iterable[Dict[str, Any]], path: PathLike) -> int:
    """Write records to ``path`` (UTF-8, ``\\n`` line endings). Returns the record count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(dumps_line(record))
            count += 1
    return count


def read_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    """Yield records from a JSONL file, raising ParseError on the first bad line."""
    path = Path(path)
    if not path.exists():
        raise SourceUnavailableError(f"File not found: {path}")
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON ({e.msg})", str(path), line_number)
