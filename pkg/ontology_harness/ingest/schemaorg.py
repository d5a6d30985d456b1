"""schema.org type hierarchy ingestion (taxonomy only, no term instances)."""

import csv
import json
import logging
from collections import Counter
from typing import Dict, Iterable, List, Set, Tuple

from ..core.errors import ParseError
from ..core.models import SourceCorpus, SourceId
from .common import PathLike, log_warnings, nfc, require_file
from .taxonomy import build_taxonomy

logger = logging.getLogger(__name__)

CLASS_TYPES = {"rdfs:Class", "http://www.w3.org/2000/01/rdf-schema#Class"}
SUBCLASS_KEYS = ("rdfs:subClassOf", "http://www.w3.org/2000/01/rdf-schema#subClassOf")


def local_name(uri: str) -> str:
    """``https://schema.org/NewsArticle`` or ``schema:NewsArticle`` -> ``NewsArticle``."""
    uri = uri.strip()
    for separator in ("/", "#", ":"):
        if separator in uri:
            uri = uri.rsplit(separator, 1)[1]
    return nfc(uri)


def _as_list(value) -> List:
    if value is None:
        return []
    return value if isinstance(value, list) else [value]


def _read_csv(path) -> Tuple[Set[str], List[Tuple[str, str]]]:
    labels: Set[str] = set()
    edges: List[Tuple[str, str]] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if not reader.fieldnames or "id" not in reader.fieldnames:
            raise ParseError("CSV export needs an 'id' column", str(path), 1)
        for line_number, row in enumerate(reader, 2):
            if not (row.get("id") or "").strip():
                raise ParseError("row without id", str(path), line_number)
            label = local_name(row["id"])
            labels.add(label)
            for parent in (row.get("subTypeOf") or "").split(","):
                if parent.strip():
                    edges.append((label, local_name(parent)))
    return labels, edges


def _walk_tree(node: Dict, parent: str, labels: Set[str], edges: List[Tuple[str, str]]) -> None:
    label = local_name(node.get("name") or node.get("@id") or "")
    if not label:
        raise ParseError("tree node without a name")
    labels.add(label)
    if parent:
        edges.append((label, parent))
    for child in _as_list(node.get("children")):
        _walk_tree(child, label, labels, edges)


def _read_jsonld(path) -> Tuple[Set[str], List[Tuple[str, str]]]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", str(path), e.lineno)

    labels: Set[str] = set()
    edges: List[Tuple[str, str]] = []

    # tree.jsonld nests children under each type
    if isinstance(document, dict) and "children" in document:
        _walk_tree(document, "", labels, edges)
        return labels, edges

    graph = document.get("@graph", []) if isinstance(document, dict) else document
    for entry in graph:
        types = set(_as_list(entry.get("@type")))
        if not types & CLASS_TYPES:
            continue
        label = local_name(entry["@id"])
        labels.add(label)
        for key in SUBCLASS_KEYS:
            for parent in _as_list(entry.get(key)):
                parent_id = parent.get("@id") if isinstance(parent, dict) else parent
                if parent_id:
                    edges.append((label, local_name(parent_id)))
    return labels, edges


def _unknown_parents(labels: Set[str], edges: Iterable[Tuple[str, str]]) -> int:
    return sum(1 for _, parent in edges if parent not in labels)


def parse_schemaorg(taxonomy_export_path: PathLike) -> SourceCorpus:
    """Parse a schema.org vocabulary export into a leveled type taxonomy.

    Accepts the types CSV (``id``, ``label``, ``subTypeOf`` columns), the
    JSON-LD vocabulary graph, or the nested ``tree.jsonld`` export. Labels
    are the local names of the type URIs.

    Raises:
        SourceUnavailableError: If the export is missing.
        ParseError: On an unreadable export.
        TaxonomyIntegrityError: If the subclass links contain a cycle.
    """
    path = require_file(taxonomy_export_path, "schema.org export")
    if path.suffix.lower() == ".csv":
        labels, edges = _read_csv(path)
    else:
        labels, edges = _read_jsonld(path)
    if not labels:
        raise ParseError("no types", str(path))

    warnings: Counter = Counter()
    warnings["links_to_unknown_types"] = _unknown_parents(labels, edges)
    taxonomy, pruned = build_taxonomy(labels, edges)
    warnings["links_pruned_for_skipping_levels"] = pruned

    logger.info(f"schema.org taxonomy: {len(taxonomy.nodes)} types over {taxonomy.level_count} levels, "
                f"{len(taxonomy.parent_edges)} links")
    return SourceCorpus(
        source_id=SourceId.SCHEMAORG,
        records=(),
        type_inventory=frozenset(taxonomy.labels),
        taxonomy=taxonomy,
        warnings=log_warnings("schemaorg", warnings),
    )
