"""Run summaries."""

from .summary_reporter import PUBLISHED_COUNTS, SummaryReporter, count_mismatches

__all__ = ["PUBLISHED_COUNTS", "SummaryReporter", "count_mismatches"]
