"""Answer spaces and the mapping of raw model output onto them."""

import logging
import re
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import yaml

from ..core.errors import ConfigurationError
from ..core.models import AnswerSpace, Prediction, SourceCorpus, SourceId, Task, UMLS_SUBONTOLOGIES
from .normalize import normalize

logger = logging.getLogger(__name__)

SYNONYMS_DIR = Path(__file__).parent / "synonyms"

# Subword markers some fill-mask tokenizers keep on their tokens (GPT-2 style, SentencePiece).
TOKEN_MARKERS = "Ġ▁"

WORD_END = re.compile(r"\w(?!\w)")

RankedTokens = Sequence[Tuple[str, float]]


def synonym_file(source_id: Union[SourceId, str]) -> str:
    source_id = SourceId(source_id)
    if source_id in UMLS_SUBONTOLOGIES:
        return "umls.yaml"
    return f"{source_id.value}.yaml"


def load_synonyms(name: str, synonyms_dir: Optional[Union[str, Path]] = None) -> Dict[str, List[str]]:
    """Read a synonym file (label -> list of variants).

    A file in ``synonyms_dir`` takes precedence over the shipped one; a
    missing file yields no synonyms.
    """
    candidates = [Path(synonyms_dir) / name] if synonyms_dir else []
    candidates.append(SYNONYMS_DIR / name)
    for path in candidates:
        if path.is_file():
            with open(path, "r", encoding="utf-8") as handle:
                data = yaml.safe_load(handle) or {}
            if not isinstance(data, dict):
                raise ConfigurationError(f"Synonym file {path} must map labels to lists of variants")
            logger.debug(f"Loaded synonyms for {len(data)} labels from {path}")
            return {str(label): [str(v) for v in (variants or [])] for label, variants in data.items()}
    return {}


def _label_forms(label: str) -> List[str]:
    forms = [label, label.replace("_", " "), label.replace(" ", "_")]
    return [form for form in (normalize(f) for f in forms) if form]


def build_answer_space(task: Union[Task, str], labels: Iterable[str],
                       synonyms: Optional[Mapping[str, Sequence[str]]] = None,
                       names: Optional[Mapping[str, str]] = None) -> AnswerSpace:
    """Build an answer space from canonical labels, display names and synonyms.

    Each label claims its own normalized forms first, then its display name,
    then its synonyms. A variant already claimed by another label is dropped
    with a warning, so variant sets stay disjoint.
    """
    task = Task(task)
    labels = sorted(set(labels))
    claimed: Dict[str, str] = {}
    variants: Dict[str, set] = {label: set() for label in labels}
    dropped = 0

    def claim(label: str, variant: str) -> None:
        nonlocal dropped
        owner = claimed.setdefault(variant, label)
        if owner == label:
            variants[label].add(variant)
        else:
            dropped += 1
            logger.debug(f"Variant '{variant}' of '{label}' already belongs to '{owner}'")

    for label in labels:
        for form in _label_forms(label):
            claim(label, form)
    for label in labels:
        name = (names or {}).get(label)
        if name:
            claim(label, normalize(name))
    for label in labels:
        for synonym in (synonyms or {}).get(label, []):
            if normalize(synonym):
                claim(label, normalize(synonym))

    if dropped:
        logger.warning(f"Dropped {dropped} answer variants claimed by more than one label")
    return AnswerSpace(task=task, labels={label: frozenset(v) for label, v in variants.items()})


@lru_cache(maxsize=1)
def _boolean_variants(synonyms_dir: Optional[str]) -> Dict[str, Tuple[str, ...]]:
    data = load_synonyms("boolean.yaml", synonyms_dir)
    if set(data) != {"true", "false"}:
        raise ConfigurationError("boolean.yaml must define exactly 'true' and 'false'")
    return {label: tuple(values) for label, values in data.items()}


def boolean_answer_space(task: Union[Task, str] = Task.TAXONOMY_DISCOVERY,
                         synonyms_dir: Optional[Union[str, Path]] = None) -> AnswerSpace:
    """The true/false answer space for taxonomy and relation tasks."""
    variants = _boolean_variants(str(synonyms_dir) if synonyms_dir else None)
    return build_answer_space(task, ["true", "false"], synonyms=variants)


def variant_index(space: AnswerSpace) -> Dict[str, str]:
    return {variant: label for label, variants in space.labels.items() for variant in variants}


def map_term_type(raw: str, space: AnswerSpace, index: Optional[Dict[str, str]] = None) -> Prediction:
    """Map generated text onto term-type labels.

    A label whose variant equals the normalized text ranks first; labels
    whose variant is a whole-word prefix of it follow, longer variants
    first, then by label. Equal-length top matches from different labels
    flag the prediction ambiguous. Nothing matching is an empty prediction.
    """
    index = index if index is not None else variant_index(space)
    text = normalize(raw)
    matches = []
    for end in (match.end() for match in WORD_END.finditer(text)):
        label = index.get(text[:end])
        if label is not None:
            matches.append((end, label))
    matches.sort(key=lambda m: (-m[0], m[1]))

    ranked: List[str] = []
    for _, label in matches:
        if label not in ranked:
            ranked.append(label)
    ambiguous = len(matches) > 1 and matches[0][0] == matches[1][0] and matches[0][1] != matches[1][1]
    return Prediction(item_id="", ranked_labels=tuple(ranked), raw_text=raw or "", ambiguous=ambiguous)


def map_ranked_term_types(tokens: RankedTokens, space: AnswerSpace,
                          index: Optional[Dict[str, str]] = None) -> Prediction:
    """Map fill-mask tokens onto term-type labels, keeping the tokens' score order."""
    index = index if index is not None else variant_index(space)
    ranked: List[str] = []
    for token, _ in sorted(tokens, key=lambda pair: -pair[1]):
        label = index.get(normalize(token.lstrip(TOKEN_MARKERS)))
        if label is not None and label not in ranked:
            ranked.append(label)
    raw = " ".join(token for token, _ in tokens)
    return Prediction(item_id="", ranked_labels=tuple(ranked), raw_text=raw)


def _variant_pattern(space: AnswerSpace) -> re.Pattern:
    variants = sorted(variant_index(space), key=lambda v: (-len(v), v))
    alternation = "|".join(re.escape(v) for v in variants)
    return re.compile(rf"(?<!\w)(?:{alternation})(?!\w)")


def map_boolean(payload: Union[str, RankedTokens], space: AnswerSpace) -> Prediction:
    """Map a response onto true/false.

    For text, the earliest whole-word variant in the normalized text decides.
    For ranked mask tokens, the highest-scored token in either variant set
    decides. No hit is an empty prediction.
    """
    index = variant_index(space)
    if isinstance(payload, str):
        match = _variant_pattern(space).search(normalize(payload))
        labels = (index[match.group(0)],) if match else ()
        return Prediction(item_id="", ranked_labels=labels, raw_text=payload)

    for token, _ in sorted(payload, key=lambda pair: -pair[1]):
        label = index.get(normalize(token.lstrip(TOKEN_MARKERS)))
        if label is not None:
            return Prediction(item_id="", ranked_labels=(label,),
                              raw_text=" ".join(t for t, _ in payload))
    return Prediction(item_id="", ranked_labels=(), raw_text=" ".join(t for t, _ in payload))


def corpus_answer_space(task: Union[Task, str], corpus: SourceCorpus,
                        synonyms_dir: Optional[Union[str, Path]] = None) -> AnswerSpace:
    """Answer space for a run on ``corpus``: its type inventory for Task A, true/false otherwise."""
    task = Task(task)
    if task != Task.TERM_TYPING:
        return boolean_answer_space(task, synonyms_dir)
    names = {}
    if corpus.taxonomy is not None:
        names = {node.label: node.name for node in corpus.taxonomy.nodes if node.name}
    synonyms = load_synonyms(synonym_file(corpus.source_id), synonyms_dir)
    return build_answer_space(task, corpus.type_inventory, synonyms=synonyms, names=names)
