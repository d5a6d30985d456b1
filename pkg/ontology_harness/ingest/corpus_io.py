"""Canonical corpus files: one JSONL record per term plus a taxonomy JSON sidecar."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from ..core.errors import ParseError, SourceUnavailableError
from ..core.models import (Partition, RelationAssertion, SourceCorpus, SourceId, Taxonomy,
                           TermRecord, TypeNode)
from ..utils.jsonl import PathLike, read_jsonl, write_jsonl

logger = logging.getLogger(__name__)


def sidecar_path(corpus_path: PathLike) -> Path:
    """``corpus.jsonl`` -> ``corpus.taxonomy.json``."""
    corpus_path = Path(corpus_path)
    return corpus_path.with_name(f"{corpus_path.stem}.taxonomy.json")


def record_to_dict(record: TermRecord) -> Dict[str, Any]:
    return {
        "term_id": record.term_id,
        "surface_form": record.surface_form,
        "context_sentence": record.context_sentence,
        "gold_types": sorted(record.gold_types),
        "source_id": record.source_id.value,
        "partition": record.partition.value if record.partition else None,
    }


def taxonomy_to_dict(taxonomy: Taxonomy) -> Dict[str, Any]:
    return {
        "level_count": taxonomy.level_count,
        "nodes": [{"label": node.label, "level": node.level, "name": node.name} for node in taxonomy.nodes],
        "parent_edges": [list(edge) for edge in sorted(taxonomy.parent_edges)],
    }


def taxonomy_from_dict(data: Dict[str, Any]) -> Taxonomy:
    return Taxonomy(
        nodes=tuple(TypeNode(node["label"], node["level"], node.get("name")) for node in data["nodes"]),
        parent_edges=frozenset((child, parent) for child, parent in data["parent_edges"]),
        level_count=data["level_count"],
    )


def write_corpus_jsonl(corpus: SourceCorpus, path: PathLike) -> Path:
    """Write the corpus records to ``path`` and its type system to the sidecar.

    Record field order is fixed: term_id, surface_form, context_sentence,
    gold_types, source_id, partition.

    Returns:
        Path of the sidecar file.
    """
    count = write_jsonl((record_to_dict(record) for record in corpus.records), path)
    sidecar = {
        "source_id": corpus.source_id.value,
        "type_inventory": sorted(corpus.type_inventory),
        "taxonomy": taxonomy_to_dict(corpus.taxonomy) if corpus.taxonomy else None,
        "relations": ([[a.head_type, a.relation, a.tail_type] for a in corpus.relations]
                      if corpus.relations is not None else None),
        "relation_inventory": sorted(corpus.relation_inventory),
        "warnings": dict(corpus.warnings),
    }
    target = sidecar_path(path)
    with open(target, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(sidecar, handle, ensure_ascii=False, indent=2)
        handle.write("\n")
    logger.info(f"Wrote {count} {corpus.source_id.value} records to {path}")
    return target


def read_corpus_jsonl(path: PathLike) -> SourceCorpus:
    """Load a corpus written by ``write_corpus_jsonl``.

    Raises:
        SourceUnavailableError: If the corpus file or its sidecar is missing.
        ParseError: On malformed records.
    """
    target = sidecar_path(path)
    if not target.is_file():
        raise SourceUnavailableError(f"Corpus sidecar not found: {target}")
    with open(target, "r", encoding="utf-8") as handle:
        try:
            meta = json.load(handle)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON ({e.msg})", str(target), e.lineno)

    records = []
    for line_number, row in enumerate(read_jsonl(path), 1):
        try:
            records.append(TermRecord(
                term_id=row["term_id"],
                surface_form=row["surface_form"],
                gold_types=frozenset(row["gold_types"]),
                source_id=SourceId(row["source_id"]),
                context_sentence=row.get("context_sentence"),
                partition=Partition(row["partition"]) if row.get("partition") else None,
            ))
        except (KeyError, ValueError) as e:
            raise ParseError(f"bad corpus record ({e})", str(path), line_number)

    relations: Optional[tuple] = None
    if meta.get("relations") is not None:
        relations = tuple(RelationAssertion(h, r, t) for h, r, t in meta["relations"])
    return SourceCorpus(
        source_id=SourceId(meta["source_id"]),
        records=tuple(records),
        type_inventory=frozenset(meta["type_inventory"]),
        taxonomy=taxonomy_from_dict(meta["taxonomy"]) if meta.get("taxonomy") else None,
        relations=relations,
        relation_inventory=frozenset(meta.get("relation_inventory", [])),
        warnings=meta.get("warnings", {}),
    )
