"""Answer mapping and scoring."""

from .answer_space import (boolean_answer_space, build_answer_space, corpus_answer_space, load_synonyms,
                           map_boolean, map_ranked_term_types, map_term_type, synonym_file)
from .metrics import ap_at_k, map_at_k, prf1
from .normalize import normalize
from .report_io import read_reports, write_report
from .scorer import best_template_summary, score_run

__all__ = [
    "ap_at_k",
    "best_template_summary",
    "boolean_answer_space",
    "build_answer_space",
    "corpus_answer_space",
    "load_synonyms",
    "map_at_k",
    "map_boolean",
    "map_ranked_term_types",
    "map_term_type",
    "normalize",
    "prf1",
    "read_reports",
    "score_run",
    "synonym_file",
    "write_report",
]
