"""UMLS ingestion from locally licensed RRF files.

Terms come from MRCONSO restricted to one source vocabulary, typed through
MRSTY with semantic type names. The semantic network (SRDEF plus SRSTRE1 or
SRSTR) supplies the type taxonomy and the non-taxonomic relation assertions
shared by every subontology.
"""

import logging
from collections import Counter, defaultdict
from functools import lru_cache
from typing import Dict, List, Optional, Set, Tuple

from tqdm import tqdm

from ..core.errors import ParseError, SourceUnavailableError
from ..core.models import RelationAssertion, SourceCorpus, SourceId, Taxonomy, UMLS_SUBONTOLOGIES
from .common import PathLike, RecordMerger, inventory_of, log_warnings, nfc, require_file
from .taxonomy import build_taxonomy

logger = logging.getLogger(__name__)

# MRCONSO.RRF: CUI|LAT|TS|LUI|STT|SUI|ISPREF|AUI|SAUI|SCUI|SDUI|SAB|TTY|CODE|STR|SRL|SUPPRESS|CVF|
MRCONSO_FIELDS = 18
CONSO_CUI, CONSO_LAT, CONSO_AUI, CONSO_SAB, CONSO_STR = 0, 1, 7, 11, 14

# MRSTY.RRF: CUI|TUI|STN|STY|ATUI|CVF|
MRSTY_MIN_FIELDS = 4
STY_CUI, STY_NAME = 0, 3

# SRDEF: RT|UI|STY_RL|STN_RTN|DEF|EX|UN|NH|ABR|RIN|
SRDEF_MIN_FIELDS = 4
ISA_UI = "T186"
# Types below the second tree level hang from their second-level ancestor.
UMLS_LEVEL_COUNT = 3

SUBONTOLOGY_SABS: Dict[SourceId, str] = {
    SourceId.NCI: "NCI",
    SourceId.MEDCIN: "MEDCIN",
    SourceId.SNOMEDCT_US: "SNOMEDCT_US",
}


def _split_rrf(line: str, minimum: int, path, line_number: int) -> List[str]:
    fields = line.rstrip("\r\n").split("|")
    if len(fields) < minimum:
        raise ParseError(f"expected at least {minimum} '|'-separated fields, found {len(fields)}",
                         str(path), line_number)
    return fields


def load_semantic_types(mrsty_path: PathLike) -> Dict[str, Set[str]]:
    """Read MRSTY into CUI -> semantic type names."""
    path = require_file(mrsty_path, "UMLS MRSTY file")
    cui_types: Dict[str, Set[str]] = defaultdict(set)
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, 1):
            if not line.strip():
                continue
            fields = _split_rrf(line, MRSTY_MIN_FIELDS, path, line_number)
            type_name = fields[STY_NAME].strip()
            if type_name:
                cui_types[fields[STY_CUI]].add(nfc(type_name))
    return dict(cui_types)


def _tree_parent(tree_number: str) -> Optional[str]:
    """Parent of a semantic-network tree number: A1.1.3 -> A1.1, A1 -> A, A -> None."""
    if "." in tree_number:
        return tree_number.rsplit(".", 1)[0]
    if len(tree_number) > 1:
        return tree_number[0]
    return None


def _tree_depth(tree_number: str) -> int:
    """Depth of a tree number: A -> 1, A1 -> 2, A1.1 -> 3, A1.1.3 -> 4."""
    head, _, rest = tree_number.partition(".")
    return (1 if len(head) == 1 else 2) + (rest.count(".") + 1 if rest else 0)


@lru_cache(maxsize=4)
def _load_semantic_network(srdef_path: str, srstre1_path: Optional[str], srstr_path: Optional[str]
                           ) -> Tuple[Taxonomy, Tuple[RelationAssertion, ...], frozenset]:
    path = require_file(srdef_path, "UMLS semantic network SRDEF file")
    type_names: Dict[str, str] = {}
    tree_numbers: Dict[str, str] = {}
    relation_names: Dict[str, str] = {}

    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, 1):
            if not line.strip():
                continue
            fields = _split_rrf(line, SRDEF_MIN_FIELDS, path, line_number)
            record_type, ui, name, tree_number = (f.strip() for f in fields[:4])
            if record_type == "STY":
                type_names[ui] = nfc(name)
                tree_numbers[tree_number] = nfc(name)
            elif record_type == "RL":
                relation_names[ui] = name
            else:
                raise ParseError(f"unknown SRDEF record type '{record_type}'", str(path), line_number)

    if not type_names:
        raise SourceUnavailableError(f"No semantic types found in {path}")

    edges = []
    for tree_number, name in tree_numbers.items():
        parent = _tree_parent(tree_number)
        while parent is not None and (parent not in tree_numbers or _tree_depth(parent) >= UMLS_LEVEL_COUNT):
            parent = _tree_parent(parent)
        if parent is not None:
            edges.append((name, tree_numbers[parent]))
    taxonomy, _ = build_taxonomy(labels=type_names.values(), edges=edges)

    inventory = frozenset(name for ui, name in relation_names.items() if ui != ISA_UI)
    types_by_name = set(type_names.values())
    assertions: Set[RelationAssertion] = set()

    if srstre1_path:
        inherited = require_file(srstre1_path, "UMLS semantic network SRSTRE1 file")
        with open(inherited, "r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, 1):
                if not line.strip():
                    continue
                head_ui, relation_ui, tail_ui = _split_rrf(line, 3, inherited, line_number)[:3]
                if relation_ui == ISA_UI or relation_ui not in relation_names:
                    continue
                if head_ui in type_names and tail_ui in type_names:
                    assertions.add(RelationAssertion(type_names[head_ui], relation_names[relation_ui],
                                                     type_names[tail_ui]))
    elif srstr_path:
        defined = require_file(srstr_path, "UMLS semantic network SRSTR file")
        with open(defined, "r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, 1):
                if not line.strip():
                    continue
                head, relation, tail, link_status = (f.strip() for f in _split_rrf(line, 4, defined, line_number)[:4])
                # B marks blocked links
                if link_status == "B" or relation == "isa":
                    continue
                if head in types_by_name and tail in types_by_name and relation in inventory:
                    assertions.add(RelationAssertion(nfc(head), relation, nfc(tail)))

    relations = tuple(sorted(assertions, key=lambda a: (a.head_type, a.relation, a.tail_type)))
    logger.info(f"UMLS semantic network: {len(taxonomy.nodes)} types over {taxonomy.level_count} levels, "
                f"{len(inventory)} relations, {len(relations)} assertions")
    return taxonomy, relations, inventory


def load_semantic_network(srdef_path: PathLike, srstre1_path: Optional[PathLike] = None,
                          srstr_path: Optional[PathLike] = None) -> SourceCorpus:
    """Load the UMLS semantic network as a term-less corpus for taxonomy and relation tasks.

    The network is parsed once per distinct set of paths and shared between
    every subontology that asks for it. Types nested below the second
    tree level are attached to their second-level ancestor, so the taxonomy
    always has three levels.

    Args:
        srdef_path: SRDEF with semantic types and relation definitions.
        srstre1_path: SRSTRE1, the fully inherited relation structure (preferred).
        srstr_path: SRSTR, the defined relation structure, used when SRSTRE1 is absent.

    Returns:
        A corpus with no records, the semantic type taxonomy and relation assertions.
    """
    taxonomy, relations, inventory = _load_semantic_network(
        str(srdef_path),
        str(srstre1_path) if srstre1_path else None,
        str(srstr_path) if srstr_path else None,
    )
    return SourceCorpus(
        source_id=SourceId.UMLS,
        records=(),
        type_inventory=frozenset(taxonomy.labels),
        taxonomy=taxonomy,
        relations=relations,
        relation_inventory=inventory,
    )


def parse_umls(mrconso_path: PathLike, mrsty_path: PathLike, subontology: SourceId,
               srdef_path: Optional[PathLike] = None, srstre1_path: Optional[PathLike] = None,
               srstr_path: Optional[PathLike] = None) -> SourceCorpus:
    """Parse one UMLS subontology into a corpus typed by semantic type.

    English MRCONSO atoms from the subontology's source vocabulary become
    terms; atoms sharing a surface form are merged. The semantic network is
    attached when SRDEF is supplied.

    Args:
        mrconso_path: MRCONSO.RRF.
        mrsty_path: MRSTY.RRF.
        subontology: One of nci, medcin, snomedct_us.
        srdef_path: Optional SRDEF for the semantic network.
        srstre1_path: Optional SRSTRE1.
        srstr_path: Optional SRSTR.

    Returns:
        The subontology corpus.

    Raises:
        SourceUnavailableError: If a file is missing or the subontology yields no records.
        ParseError: On lines with the wrong delimiter or column count.
    """
    subontology = SourceId(subontology)
    if subontology not in UMLS_SUBONTOLOGIES:
        raise SourceUnavailableError(f"'{subontology.value}' is not a UMLS subontology")
    sab = SUBONTOLOGY_SABS[subontology]

    cui_types = load_semantic_types(mrsty_path)
    path = require_file(mrconso_path, "UMLS MRCONSO file")
    merger = RecordMerger(subontology)
    warnings: Counter = Counter()

    logger.info(f"Parsing {path} for source vocabulary {sab}")
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(tqdm(handle, desc=f"MRCONSO {sab}", unit=" atoms", disable=None), 1):
            if not line.strip():
                continue
            fields = _split_rrf(line, MRCONSO_FIELDS, path, line_number)
            if fields[CONSO_SAB] != sab or fields[CONSO_LAT] != "ENG":
                continue
            surface = nfc(fields[CONSO_STR].strip())
            if not surface:
                warnings["atoms_without_string"] += 1
                continue
            types = cui_types.get(fields[CONSO_CUI])
            if not types:
                warnings["untyped_concepts"] += 1
                continue
            merger.add(fields[CONSO_AUI], surface, types)

    if not len(merger):
        raise SourceUnavailableError(f"UMLS subontology {sab} yields no records from {path}")

    records = merger.records()
    taxonomy, relations, relation_inventory = None, None, frozenset()
    if srdef_path:
        network = load_semantic_network(srdef_path, srstre1_path, srstr_path)
        taxonomy, relations, relation_inventory = network.taxonomy, network.relations, network.relation_inventory

    corpus = SourceCorpus(
        source_id=subontology,
        records=records,
        type_inventory=inventory_of(records),
        taxonomy=taxonomy,
        relations=relations,
        relation_inventory=relation_inventory,
        warnings=log_warnings(subontology.value, warnings),
    )
    logger.info(f"{sab} corpus: {len(records)} records, {len(corpus.type_inventory)} types")
    return corpus
