"""Taxonomy construction and validation."""

import logging
from collections import deque
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx

from ..core.errors import TaxonomyIntegrityError
from ..core.models import Taxonomy, TypeNode, ValidationReport

logger = logging.getLogger(__name__)


def to_graph(taxonomy: Taxonomy) -> nx.DiGraph:
    """Directed graph with one edge per (child, parent) pair, pointing upwards."""
    graph = nx.DiGraph()
    for node in taxonomy.nodes:
        graph.add_node(node.label, level=node.level)
    graph.add_edges_from(sorted(taxonomy.parent_edges))
    return graph


def build_taxonomy(labels: Iterable[str], edges: Iterable[Tuple[str, str]],
                   names: Optional[Mapping[str, str]] = None) -> Tuple[Taxonomy, int]:
    """Build a leveled taxonomy from unleveled subclass links.

    Each type's level is its shortest distance from a root (a type without
    parents). Links that do not go exactly one level up are dropped, so every
    kept edge satisfies the one-level-up invariant; every non-root type keeps
    at least the link that gave it its level.

    Args:
        labels: All type labels.
        edges: (child, parent) links; links to unknown labels are ignored.
        names: Optional display names per label.

    Returns:
        The taxonomy and the number of links pruned.

    Raises:
        TaxonomyIntegrityError: If the links contain a cycle.
    """
    names = names or {}
    label_set = set(labels)
    graph = nx.DiGraph()
    graph.add_nodes_from(sorted(label_set))
    for child, parent in edges:
        if child in label_set and parent in label_set:
            graph.add_edge(child, parent)

    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        raise TaxonomyIntegrityError("subclass links contain a cycle",
                                     [child for child, _ in cycle] + [cycle[0][0]])

    levels: Dict[str, int] = {}
    queue = deque()
    for label in sorted(label_set):
        if graph.out_degree(label) == 0:
            levels[label] = 0
            queue.append(label)
    while queue:
        parent = queue.popleft()
        for child in sorted(graph.predecessors(parent)):
            if child not in levels:
                levels[child] = levels[parent] + 1
                queue.append(child)

    kept = {(child, parent) for child, parent in graph.edges()
            if levels[parent] == levels[child] - 1}
    pruned = graph.number_of_edges() - len(kept)
    if pruned:
        logger.warning(f"Pruned {pruned} subclass links that skip taxonomy levels")

    nodes = tuple(TypeNode(label=label, level=levels[label], name=names.get(label))
                  for label in sorted(label_set, key=lambda l: (levels[l], l)))
    level_count = max(levels.values()) + 1 if levels else 0
    return Taxonomy(nodes=nodes, parent_edges=frozenset(kept), level_count=level_count), pruned


def _canonical_cycle(cycle: List[str]) -> List[str]:
    start = cycle.index(min(cycle))
    return cycle[start:] + cycle[:start]


def validate_taxonomy(taxonomy: Taxonomy) -> ValidationReport:
    """Enumerate every taxonomy invariant violation.

    Violations are returned as data; an empty report means the taxonomy is
    acyclic, every edge goes exactly one level up, every non-root node has a
    parent, and all labels and levels are well formed.
    """
    report = ValidationReport()

    levels: Dict[str, int] = {}
    seen: Set[str] = set()
    for node in taxonomy.nodes:
        if node.label in seen:
            report.duplicate_labels.append(node.label)
        seen.add(node.label)
        levels[node.label] = node.level
        if node.level < 0 or node.level >= taxonomy.level_count:
            report.level_violations.append(node.label)

    graph = nx.DiGraph()
    graph.add_nodes_from(sorted(levels))
    for child, parent in sorted(taxonomy.parent_edges):
        if child not in levels or parent not in levels:
            report.unknown_endpoints.append((child, parent))
            continue
        graph.add_edge(child, parent)
        if levels[child] != levels[parent] + 1:
            report.cross_level_edges.append((child, parent))

    report.cycles = sorted(_canonical_cycle(list(cycle)) for cycle in nx.simple_cycles(graph))

    for label in sorted(levels):
        if levels[label] > 0 and graph.out_degree(label) == 0:
            report.orphans.append(label)

    report.duplicate_labels.sort()
    report.level_violations.sort()
    return report
