"""Task A/B/C dataset builders."""

import logging
import random
from bisect import bisect_right
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ..core.errors import CapacityError, EmptyDatasetError, IntegrityError, TaxonomyIntegrityError
from ..core.models import (Provenance, RelationAssertion, RelationTripleItem, SourceCorpus, Taxonomy,
                           TermTypingItem, TypePairItem)
from ..ingest.taxonomy import to_graph, validate_taxonomy

logger = logging.getLogger(__name__)


def build_term_typing(corpus: SourceCorpus) -> List[TermTypingItem]:
    """One term typing item per corpus record, ordered by term id.

    Raises:
        EmptyDatasetError: If the corpus has no records.
    """
    if not corpus.records:
        raise EmptyDatasetError(f"Corpus {corpus.source_id.value} has no records to type")
    items = [
        TermTypingItem(
            item_id=record.term_id,
            surface_form=record.surface_form,
            gold_types=record.gold_types,
            source_id=record.source_id,
            partition=record.partition,
            context_sentence=record.context_sentence,
        )
        for record in corpus.records
    ]
    items.sort(key=lambda item: item.item_id)
    logger.info(f"Built {len(items)} term typing items for {corpus.source_id.value}")
    return items


def superclass_pairs(taxonomy: Taxonomy, closure_depth: Optional[int] = None) -> List[Tuple[str, str, int]]:
    """Every (ancestor, descendant, distance) reachable through parent links.

    ``closure_depth`` caps the distance; None means the full closure.
    """
    graph = to_graph(taxonomy)
    pairs = []
    for descendant in sorted(graph.nodes):
        distances = nx.single_source_shortest_path_length(graph, descendant, cutoff=closure_depth)
        for ancestor, distance in distances.items():
            if distance >= 1:
                pairs.append((ancestor, descendant, distance))
    pairs.sort()
    return pairs


def build_taxonomy_pairs(taxonomy: Taxonomy, closure_depth: Optional[int] = None,
                         dataset_id: str = "B") -> List[TypePairItem]:
    """Build the balanced is-a pair dataset of a taxonomy.

    Positives claim ``a`` is the superclass of ``b`` for every ancestor
    ``a`` of ``b``: direct parent links plus the transitive closure.
    Negatives are the exact inversions of the positives.

    Args:
        taxonomy: A taxonomy that passes ``validate_taxonomy``.
        closure_depth: Maximum level gap for transitive pairs; None spans all gaps.
        dataset_id: Prefix for item ids.

    Returns:
        Items ordered by (type_a, type_b); a single-level taxonomy yields none.

    Raises:
        TaxonomyIntegrityError: If the taxonomy violates its invariants.
    """
    report = validate_taxonomy(taxonomy)
    if not report.is_empty:
        raise TaxonomyIntegrityError(f"taxonomy is not valid ({report.summary()})",
                                     report.cycles[0] if report.cycles else None)
    if closure_depth is not None and closure_depth < 1:
        raise ValueError(f"closure_depth must be at least 1, got {closure_depth}")

    names = {node.label: node.name for node in taxonomy.nodes}

    def text(label: str) -> Optional[str]:
        return names.get(label)

    rows = []
    for ancestor, descendant, distance in superclass_pairs(taxonomy, closure_depth):
        direct = distance == 1
        rows.append((ancestor, descendant, True, Provenance.DIRECT if direct else Provenance.TRANSITIVE))
        rows.append((descendant, ancestor, False,
                     Provenance.INVERTED if direct else Provenance.TRANSITIVE_INVERTED))
    rows.sort(key=lambda row: (row[0], row[1]))

    items = [
        TypePairItem(
            item_id=f"{dataset_id}-{index:06d}",
            type_a=type_a,
            type_b=type_b,
            label=label,
            provenance=provenance,
            a_text=text(type_a),
            b_text=text(type_b),
        )
        for index, (type_a, type_b, label, provenance) in enumerate(rows)
    ]
    positives = sum(1 for item in items if item.label)
    logger.info(f"Built {positives} positive and {len(items) - positives} negative type pairs "
                f"from {len(taxonomy.nodes)} types")
    return items


def _free_index(rank: int, taken: Sequence[int]) -> int:
    """Index of the ``rank``-th position (0-based) not listed in sorted ``taken``."""
    index = rank
    while True:
        candidate = rank + bisect_right(taken, index)
        if candidate == index:
            return index
        index = candidate


def build_relation_triples(relations: Sequence[RelationAssertion], taxonomy: Taxonomy,
                           negative_count: int, seed: int, dataset_id: str = "C",
                           relation_inventory: Iterable[str] = ()) -> List[RelationTripleItem]:
    """Build the relation triple dataset: every assertion plus sampled negatives.

    Negative candidates are all (head, relation, tail) combinations over the
    taxonomy's types, self-pairs included, that are not asserted. Exactly
    ``negative_count`` of them are drawn uniformly without replacement from a
    generator seeded with ``seed``.

    Args:
        relations: The asserted triples.
        taxonomy: Type system the heads and tails belong to.
        negative_count: Number of negatives to draw.
        seed: Sampling seed.
        dataset_id: Prefix for item ids.
        relation_inventory: Extra relation names that may have no assertions.

    Raises:
        EmptyDatasetError: If there are no assertions.
        IntegrityError: If an assertion references a type outside the taxonomy.
        CapacityError: If fewer than ``negative_count`` candidates exist.
    """
    if not relations:
        raise EmptyDatasetError("No relation assertions to build triples from")
    labels = taxonomy.labels
    label_set = set(labels)
    unknown = {a.head_type for a in relations if a.head_type not in label_set}
    unknown |= {a.tail_type for a in relations if a.tail_type not in label_set}
    if unknown:
        raise IntegrityError("Relation assertions reference unknown types", unknown)

    relation_names = sorted({a.relation for a in relations} | set(relation_inventory))
    asserted = {(a.head_type, a.relation, a.tail_type) for a in relations}

    n_labels, n_relations = len(labels), len(relation_names)
    label_pos = {label: i for i, label in enumerate(labels)}
    relation_pos = {name: i for i, name in enumerate(relation_names)}

    def encode(head: str, relation: str, tail: str) -> int:
        return (label_pos[head] * n_relations + relation_pos[relation]) * n_labels + label_pos[tail]

    def decode(index: int) -> Tuple[str, str, str]:
        rest, tail = divmod(index, n_labels)
        head, relation = divmod(rest, n_relations)
        return labels[head], relation_names[relation], labels[tail]

    taken = sorted(encode(*triple) for triple in asserted)
    available = n_labels * n_relations * n_labels - len(taken)
    if negative_count < 0:
        raise ValueError(f"negative_count must not be negative, got {negative_count}")
    if negative_count > available:
        raise CapacityError(f"Cannot draw {negative_count} negative triples", available)

    rng = random.Random(seed)
    negatives = {decode(_free_index(rank, taken)) for rank in rng.sample(range(available), negative_count)}

    rows = [(triple, True) for triple in asserted] + [(triple, False) for triple in negatives]
    rows.sort()
    items = [
        RelationTripleItem(item_id=f"{dataset_id}-{index:06d}", head=head, relation=relation,
                           tail=tail, label=label)
        for index, ((head, relation, tail), label) in enumerate(rows)
    ]
    logger.info(f"Built {len(asserted)} positive and {len(negatives)} negative relation triples "
                f"over {n_relations} relations")
    return items
