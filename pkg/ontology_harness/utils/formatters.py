"""Formatting utilities for harness reports."""

from datetime import datetime
from typing import Optional

from dateutil import parser as date_parser
from dateutil import tz


def format_count(value: Optional[int]) -> str:
    """Format an integer count with thousands separators.

    Args:
        value: Count to format.

    Returns:
        Formatted count, or "-" when absent.
    """
    if value is None:
        return "-"
    return f"{value:,}"


def format_score(value: Optional[float], digits: int = 1) -> str:
    """Format a score in [0, 1] as a percentage, the way the result tables print it.

    Args:
        value: Score in [0, 1].
        digits: Decimal places to keep.

    Returns:
        Percentage string without the percent sign, or "-" when absent.
    """
    if value is None:
        return "-"
    return f"{value * 100:.{digits}f}"


def utc_timestamp() -> str:
    """Current time as an ISO-8601 UTC string."""
    return datetime.now(tz.tzutc()).isoformat(timespec="seconds")


def format_date(timestamp: Optional[str], short: bool = False) -> str:
    """Format an ISO-8601 timestamp for display.

    Args:
        timestamp: ISO-8601 string as stored in run manifests.
        short: If True, use short format.

    Returns:
        Formatted date string.
    """
    if not timestamp:
        return "-"
    dt = date_parser.isoparse(timestamp)
    if short:
        return dt.strftime('%Y-%m-%d %H:%M')
    return dt.strftime('%Y-%m-%d %H:%M:%S')


def format_elapsed(started: Optional[str], finished: Optional[str]) -> str:
    """Format the wall-clock time between two manifest timestamps."""
    if not started or not finished:
        return "-"
    seconds = (date_parser.isoparse(finished) - date_parser.isoparse(started)).total_seconds()
    minutes, seconds = divmod(int(seconds), 60)
    hours, minutes = divmod(minutes, 60)
    if hours:
        return f"{hours}h{minutes:02d}m{seconds:02d}s"
    if minutes:
        return f"{minutes}m{seconds:02d}s"
    return f"{seconds}s"
