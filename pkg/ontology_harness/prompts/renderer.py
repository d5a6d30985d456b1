"""Placeholder substitution of prompt templates."""

from typing import Dict, Optional

from ..core.errors import RenderError
from ..core.models import (ModelFamily, PromptTemplate, RelationTripleItem, RenderedPrompt, TaskItem,
                           TermTypingItem, TypePairItem)
from .catalog import PLACEHOLDER

SENTENCE_SEGMENT = "{S}. "


def relation_phrase(relation: str) -> str:
    """Render a relation name for "{h} is {r} {t}": ``associated_with`` -> ``associated with``."""
    phrase = " ".join(relation.replace("_", " ").split())
    if phrase.startswith("is "):
        phrase = phrase[3:]
    return phrase


def item_values(template: PromptTemplate, item: TaskItem) -> Dict[str, Optional[str]]:
    """Placeholder values an item can supply. Type pairs prefer display names."""
    if isinstance(item, TermTypingItem):
        return {"S": item.context_sentence, "L": item.surface_form, "P_domain": template.domain_phrase}
    if isinstance(item, TypePairItem):
        return {"a": item.a_text or item.type_a, "b": item.b_text or item.type_b,
                "P_hierarchy": template.hierarchy_phrase}
    if isinstance(item, RelationTripleItem):
        return {"h": item.head, "r": relation_phrase(item.relation), "t": item.tail}
    raise RenderError(f"Cannot render a {type(item).__name__}")


def render(template: PromptTemplate, item: TaskItem, mask_token: str = "[MASK]") -> RenderedPrompt:
    """Substitute an item into a template.

    A missing context sentence drops the whole "{S}. " segment. Only masked
    templates carry {MASK}, which becomes ``mask_token``.

    Raises:
        RenderError: If the pattern has placeholders the item cannot fill.
    """
    values = item_values(template, item)
    pattern = template.pattern
    if values.get("S") is None and SENTENCE_SEGMENT in pattern:
        pattern = pattern.replace(SENTENCE_SEGMENT, "")

    mask_token_used = None
    if template.model_family == ModelFamily.MASKED:
        values["MASK"] = mask_token
        mask_token_used = mask_token

    missing = [name for name in PLACEHOLDER.findall(pattern) if values.get(name) is None]
    if missing:
        raise RenderError(f"{item.item_id} cannot fill {template.template_id}", missing)

    # single pass, so braces inside substituted values are left alone
    text = PLACEHOLDER.sub(lambda match: values[match.group(1)], pattern)
    return RenderedPrompt(template_id=template.template_id, item_id=item.item_id, text=text,
                          mask_token_used=mask_token_used)
