"""Data models for ontology ingestion, task datasets, prompting and scoring."""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

from .errors import ConfigurationError, DataError, IntegrityError


class SourceId(str, Enum):
    """Knowledge sources (and UMLS subontologies) known to the harness."""

    WORDNET = "wordnet"
    GEONAMES = "geonames"
    NCI = "nci"
    MEDCIN = "medcin"
    SNOMEDCT_US = "snomedct_us"
    UMLS = "umls"
    SCHEMAORG = "schemaorg"


UMLS_SUBONTOLOGIES = (SourceId.NCI, SourceId.MEDCIN, SourceId.SNOMEDCT_US)


class Task(str, Enum):
    TERM_TYPING = "A"
    TAXONOMY_DISCOVERY = "B"
    RELATION_EXTRACTION = "C"


class Partition(str, Enum):
    TRAIN = "train"
    TEST = "test"


class ModelFamily(str, Enum):
    MASKED = "masked"
    SEQ2SEQ = "seq2seq"
    CAUSAL = "causal"
    CAUSAL_ANSWER_SUFFIX = "causal_answer_suffix"


class Provenance(str, Enum):
    DIRECT = "direct"
    INVERTED = "inverted"
    TRANSITIVE = "transitive"
    TRANSITIVE_INVERTED = "transitive_inverted"


class BackendKind(str, Enum):
    COMPLETION = "completion"
    CHAT = "chat"
    FILL_MASK = "fill_mask"
    STUB_ECHO_GOLD = "stub_echo_gold"
    STUB_CONSTANT = "stub_constant"

    @property
    def is_stub(self) -> bool:
        return self in (BackendKind.STUB_ECHO_GOLD, BackendKind.STUB_CONSTANT)


# --------------------------------------------------------------------------
# Ontology ingestion
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TermRecord:
    """A lexical term with its gold types and optional context sentence."""
    term_id: str
    surface_form: str
    gold_types: FrozenSet[str]
    source_id: SourceId
    context_sentence: Optional[str] = None
    partition: Optional[Partition] = None

    def __post_init__(self):
        if not self.surface_form.strip():
            raise DataError(f"Term {self.term_id} has an empty surface form")
        if not self.gold_types:
            raise DataError(f"Term {self.term_id} has no gold types")


@dataclass(frozen=True)
class TypeNode:
    """A type at a given taxonomy level. ``name`` is an optional display phrase."""
    label: str
    level: int
    name: Optional[str] = None


@dataclass(frozen=True)
class Taxonomy:
    """Leveled type nodes joined by (child_label, parent_label) edges.

    Construction does not enforce the structural invariants so that broken
    taxonomies can still be represented and reported on; see
    ``ontology_harness.ingest.taxonomy.validate_taxonomy``.
    """
    nodes: Tuple[TypeNode, ...]
    parent_edges: FrozenSet[Tuple[str, str]]
    level_count: int

    @property
    def labels(self) -> List[str]:
        return sorted(node.label for node in self.nodes)

    def node(self, label: str) -> TypeNode:
        for candidate in self.nodes:
            if candidate.label == label:
                return candidate
        raise KeyError(label)

    def levels(self) -> Dict[str, int]:
        return {node.label: node.level for node in self.nodes}

    def display_name(self, label: str) -> str:
        names = {node.label: node.name for node in self.nodes}
        return names.get(label) or label

    def parents(self, label: str) -> List[str]:
        return sorted(parent for child, parent in self.parent_edges if child == label)


@dataclass(frozen=True)
class RelationAssertion:
    head_type: str
    relation: str
    tail_type: str


@dataclass(frozen=True)
class SourceCorpus:
    """Everything parsed from one knowledge source."""
    source_id: SourceId
    records: Tuple[TermRecord, ...]
    type_inventory: FrozenSet[str]
    taxonomy: Optional[Taxonomy] = None
    relations: Optional[Tuple[RelationAssertion, ...]] = None
    relation_inventory: FrozenSet[str] = frozenset()
    warnings: Mapping[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        stray = set()
        for record in self.records:
            stray.update(record.gold_types - self.type_inventory)
        if stray:
            raise IntegrityError("Gold types missing from the type inventory", stray)

    def partition_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for record in self.records:
            key = record.partition.value if record.partition else "unsplit"
            counts[key] = counts.get(key, 0) + 1
        return counts


@dataclass
class ValidationReport:
    """Taxonomy invariant violations. Empty means the taxonomy is sound."""
    cycles: List[List[str]] = field(default_factory=list)
    cross_level_edges: List[Tuple[str, str]] = field(default_factory=list)
    orphans: List[str] = field(default_factory=list)
    unknown_endpoints: List[Tuple[str, str]] = field(default_factory=list)
    level_violations: List[str] = field(default_factory=list)
    duplicate_labels: List[str] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not (self.cycles or self.cross_level_edges or self.orphans
                    or self.unknown_endpoints or self.level_violations
                    or self.duplicate_labels)

    def summary(self) -> str:
        if self.is_empty:
            return "taxonomy valid"
        parts = []
        for name in ("cycles", "cross_level_edges", "orphans", "unknown_endpoints",
                     "level_violations", "duplicate_labels"):
            count = len(getattr(self, name))
            if count:
                parts.append(f"{count} {name.replace('_', ' ')}")
        return ", ".join(parts)


# --------------------------------------------------------------------------
# Task datasets
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TermTypingItem:
    item_id: str
    surface_form: str
    gold_types: FrozenSet[str]
    source_id: SourceId
    partition: Optional[Partition] = None
    context_sentence: Optional[str] = None


@dataclass(frozen=True)
class TypePairItem:
    """``type_a`` is the claimed superclass of ``type_b``; ``label`` says whether that holds."""
    item_id: str
    type_a: str
    type_b: str
    label: bool
    provenance: Provenance
    partition: Optional[Partition] = None
    a_text: Optional[str] = None
    b_text: Optional[str] = None


@dataclass(frozen=True)
class RelationTripleItem:
    item_id: str
    head: str
    relation: str
    tail: str
    label: bool
    partition: Optional[Partition] = None


TaskItem = Union[TermTypingItem, TypePairItem, RelationTripleItem]


@dataclass(frozen=True)
class SplitSpec:
    """Fraction of items assigned to the test partition, and the shuffle seed."""
    test_fraction: Fraction
    seed: int = 0

    def __post_init__(self):
        fraction = Fraction(str(self.test_fraction)) if not isinstance(self.test_fraction, Fraction) \
            else self.test_fraction
        if not (0 < fraction <= 1):
            raise ConfigurationError(f"test_fraction must be in (0, 1], got {self.test_fraction}")
        object.__setattr__(self, "test_fraction", fraction)


# --------------------------------------------------------------------------
# Prompting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    task: Task
    source_id: str
    model_family: ModelFamily
    pattern: str
    domain_phrase: Optional[str] = None
    hierarchy_phrase: Optional[str] = None


@dataclass(frozen=True)
class RenderedPrompt:
    template_id: str
    item_id: str
    text: str
    mask_token_used: Optional[str] = None


# --------------------------------------------------------------------------
# Backends
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BackendConfig:
    backend_id: str
    kind: BackendKind
    model_name: str
    endpoint_url: Optional[str] = None
    max_output_tokens: int = 16
    temperature: float = 0.0
    request_timeout: float = 30.0
    max_retries: int = 3
    stub_constant_text: Optional[str] = None
    api_key_env: str = "OPENAI_API_KEY"
    mask_token: str = "[MASK]"
    top_k: int = 10
    requests_per_second: Optional[float] = None
    backoff_seconds: float = 1.0


@dataclass(frozen=True)
class RawResponse:
    """Backend output: free text for generative kinds, ranked tokens for fill-mask."""
    item_id: str
    template_id: str
    backend_id: str
    text: Optional[str] = None
    ranked_tokens: Optional[Tuple[Tuple[str, float], ...]] = None
    latency: float = 0.0
    from_cache: bool = False

    @property
    def payload(self) -> Union[str, Tuple[Tuple[str, float], ...]]:
        if self.ranked_tokens is not None:
            return self.ranked_tokens
        return self.text or ""


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AnswerSpace:
    """Canonical labels and the surface variants accepted for each."""
    task: Task
    labels: Mapping[str, FrozenSet[str]]

    def __post_init__(self):
        seen: Dict[str, str] = {}
        for label, variants in self.labels.items():
            if not variants:
                raise ConfigurationError(f"Answer label '{label}' has no variants")
            for variant in variants:
                owner = seen.setdefault(variant, label)
                if owner != label:
                    raise ConfigurationError(
                        f"Answer variant '{variant}' is shared by '{owner}' and '{label}'")


@dataclass(frozen=True)
class Prediction:
    item_id: str
    ranked_labels: Tuple[str, ...]
    raw_text: str
    ambiguous: bool = False

    def __post_init__(self):
        if len(set(self.ranked_labels)) != len(self.ranked_labels):
            raise DataError(f"Prediction for {self.item_id} has duplicate labels")

    @property
    def top(self) -> Optional[str]:
        return self.ranked_labels[0] if self.ranked_labels else None


@dataclass(frozen=True)
class LedgerEntry:
    item_id: str
    predicted: Tuple[str, ...]
    gold: Tuple[str, ...]
    hit: bool
    ambiguous: bool = False
    miss: bool = False


@dataclass
class EvalReport:
    task: Task
    dataset_id: str
    backend_id: str
    template_id: str
    n_items: int
    k: int = 1
    map_at_1: Optional[float] = None
    map_at_k: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None
    per_item: List[LedgerEntry] = field(default_factory=list)

    @property
    def primary_score(self) -> float:
        if self.task == Task.TERM_TYPING:
            return self.map_at_1 or 0.0
        return self.f1 or 0.0


@dataclass
class RunScore:
    """Per-template reports of one scored run and the best of them."""
    reports: List[EvalReport]
    best: EvalReport
    summary: Dict[str, object] = field(default_factory=dict)


# --------------------------------------------------------------------------
# Runs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    run_id: str
    task: Task
    source_id: SourceId
    model_family: ModelFamily
    backend_id: str
    templates: Union[str, Tuple[str, ...]] = "best-of-8"
    split: Optional[SplitSpec] = None
    cache_dir: str = "./cache"
    output_dir: str = "./outputs"
    parallelism: int = 4
    k: int = 1
    closure_depth: Optional[int] = None
    negative_count: int = 1896
    negative_seed: int = 0


@dataclass
class RunManifest:
    run_id: str
    config_snapshot: Dict[str, object]
    artifact_version: str
    dataset_hash: Optional[str] = None
    catalog_hash: Optional[str] = None
    started_at: Optional[str] = None
    finished_at: Optional[str] = None
    stages: Dict[str, str] = field(default_factory=dict)
    failure: Optional[str] = None
    dataset_stats: Dict[str, object] = field(default_factory=dict)

    @property
    def is_complete(self) -> bool:
        return bool(self.stages) and all(status == "completed" for status in self.stages.values())
