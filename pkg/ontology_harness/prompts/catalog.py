"""Prompt template catalogs shipped as data files under ``templates/``."""

import json
import logging
import re
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Tuple, Union

from ..core.errors import CatalogMissingError, ParseError
from ..core.models import ModelFamily, PromptTemplate, SourceId, Task, UMLS_SUBONTOLOGIES
from ..utils.hashing import hash_files

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent / "templates"

PLACEHOLDER = re.compile(r"\{(\w+)\}")

ALLOWED_PLACEHOLDERS: Dict[Task, frozenset] = {
    Task.TERM_TYPING: frozenset({"S", "L", "P_domain", "MASK"}),
    Task.TAXONOMY_DISCOVERY: frozenset({"a", "b", "P_hierarchy", "MASK"}),
    Task.RELATION_EXTRACTION: frozenset({"h", "r", "t", "MASK"}),
}

# Which catalog source serves each knowledge source, per task. "*" is shared by all.
CATALOG_SOURCES: Dict[Task, Dict[SourceId, str]] = {
    Task.TERM_TYPING: {
        SourceId.WORDNET: "wordnet",
        SourceId.GEONAMES: "geonames",
        **{source: "umls" for source in (SourceId.UMLS,) + UMLS_SUBONTOLOGIES},
    },
    Task.TAXONOMY_DISCOVERY: {
        SourceId.GEONAMES: "*",
        SourceId.UMLS: "*",
        SourceId.SCHEMAORG: "*",
    },
    Task.RELATION_EXTRACTION: {
        SourceId.UMLS: "umls",
    },
}

CATALOG_SIZE = {Task.TERM_TYPING: 8, Task.TAXONOMY_DISCOVERY: 8, Task.RELATION_EXTRACTION: 1}


def catalog_files() -> List[Path]:
    return sorted(TEMPLATE_DIR.glob("*.jsonl"))


def _parse_record(record: Dict, path: Path, line_number: int) -> PromptTemplate:
    try:
        template = PromptTemplate(
            template_id=record["template_id"],
            task=Task(record["task"]),
            source_id=record["source"],
            model_family=ModelFamily(record["family"]),
            pattern=record["pattern"],
            domain_phrase=record.get("domain_phrase"),
            hierarchy_phrase=record.get("hierarchy_phrase"),
        )
    except (KeyError, ValueError) as e:
        raise ParseError(f"bad template record ({e})", str(path), line_number)

    placeholders = set(PLACEHOLDER.findall(template.pattern))
    stray = placeholders - ALLOWED_PLACEHOLDERS[template.task]
    if stray:
        raise ParseError(f"{template.template_id} uses placeholders not allowed for Task "
                         f"{template.task.value}: {sorted(stray)}", str(path), line_number)
    mask_count = template.pattern.count("{MASK}")
    if template.model_family == ModelFamily.MASKED and mask_count != 1:
        raise ParseError(f"{template.template_id} must contain exactly one {{MASK}}", str(path), line_number)
    if template.model_family != ModelFamily.MASKED and mask_count:
        raise ParseError(f"{template.template_id} is not a masked template but contains {{MASK}}",
                         str(path), line_number)
    return template


@lru_cache(maxsize=1)
def load_templates() -> Tuple[PromptTemplate, ...]:
    """Every template of every shipped catalog, validated once per process."""
    templates: List[PromptTemplate] = []
    seen = set()
    for path in catalog_files():
        with open(path, "r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ParseError(f"invalid JSON ({e.msg})", str(path), line_number)
                template = _parse_record(record, path, line_number)
                if template.template_id in seen:
                    raise ParseError(f"duplicate template id {template.template_id}", str(path), line_number)
                seen.add(template.template_id)
                templates.append(template)
    logger.debug(f"Loaded {len(templates)} prompt templates from {TEMPLATE_DIR}")
    return tuple(templates)


def template_number(template: PromptTemplate) -> int:
    """Position of a template within its catalog, counted from 1."""
    return int(template.template_id.rsplit(".", 1)[1])


def template_catalog(task: Union[Task, str], source_id: Union[SourceId, str],
                     model_family: Union[ModelFamily, str]) -> List[PromptTemplate]:
    """Return the catalog for one task, knowledge source and model family.

    Templates come back in their published t1..tN order.

    Raises:
        CatalogMissingError: If no catalog exists for the combination.
    """
    task, source_id, model_family = Task(task), SourceId(source_id), ModelFamily(model_family)
    catalog_source = CATALOG_SOURCES[task].get(source_id)
    if catalog_source is None:
        raise CatalogMissingError(f"No Task {task.value} catalog for source {source_id.value}")
    templates = [t for t in load_templates()
                 if t.task == task and t.source_id == catalog_source and t.model_family == model_family]
    if not templates:
        raise CatalogMissingError(f"No Task {task.value} catalog for source {source_id.value} "
                                  f"and model family {model_family.value}")
    return sorted(templates, key=template_number)


def find_template(template_id: str) -> PromptTemplate:
    for template in load_templates():
        if template.template_id == template_id:
            return template
    raise CatalogMissingError(f"Unknown template id {template_id}")


def dump_catalog(task: Union[Task, str], source_id: Union[SourceId, str],
                 model_family: Union[ModelFamily, str]) -> str:
    """The catalog as JSON lines, in the shipped record format."""
    lines = []
    for template in template_catalog(task, source_id, model_family):
        lines.append(json.dumps({
            "template_id": template.template_id,
            "task": template.task.value,
            "source": template.source_id,
            "family": template.model_family.value,
            "pattern": template.pattern,
            "domain_phrase": template.domain_phrase,
            "hierarchy_phrase": template.hierarchy_phrase,
        }, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def catalog_hash() -> str:
    return hash_files(catalog_files())
