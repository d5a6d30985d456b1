"""Response log files: one JSON line per (template, item) response."""

from typing import Any, Dict, List

from ..core.errors import ParseError
from ..core.models import RawResponse
from ..utils.jsonl import PathLike, read_jsonl


def response_to_dict(response: RawResponse) -> Dict[str, Any]:
    """Response log record. Latency is left out so replays write the same bytes."""
    return {
        "template_id": response.template_id,
        "item_id": response.item_id,
        "backend_id": response.backend_id,
        "text": response.text,
        "ranked_tokens": [list(pair) for pair in response.ranked_tokens] if response.ranked_tokens else None,
        "from_cache": response.from_cache,
    }


def response_from_dict(row: Dict[str, Any]) -> RawResponse:
    ranked = row.get("ranked_tokens")
    return RawResponse(
        item_id=row["item_id"],
        template_id=row["template_id"],
        backend_id=row["backend_id"],
        text=row.get("text"),
        ranked_tokens=tuple((str(token), float(score)) for token, score in ranked) if ranked else None,
        from_cache=bool(row.get("from_cache", False)),
    )


def read_responses(path: PathLike) -> List[RawResponse]:
    """Read a response log.

    Raises:
        SourceUnavailableError: If the file does not exist.
        ParseError: On malformed lines or records missing required fields.
    """
    responses = []
    for line_number, row in enumerate(read_jsonl(path), 1):
        try:
            responses.append(response_from_dict(row))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"bad response record ({e})", str(path), line_number)
    return responses
