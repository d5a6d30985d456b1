"""Deterministic local backends for oracle and baseline runs."""

from typing import Mapping, Optional

from ..core.errors import ConfigurationError, IntegrityError
from ..core.models import BackendConfig, BackendKind, RawResponse, RenderedPrompt, TaskItem, TermTypingItem


def gold_answer(item: TaskItem) -> str:
    """The text an oracle would answer for an item."""
    if isinstance(item, TermTypingItem):
        return sorted(item.gold_types)[0]
    return "true" if item.label else "false"


def stub_response(config: BackendConfig, prompt: RenderedPrompt,
                  oracle: Optional[Mapping[str, str]] = None) -> RawResponse:
    """Answer a prompt without any network traffic.

    ``stub_echo_gold`` looks the item up in ``oracle`` (item id -> gold
    text); ``stub_constant`` always answers ``stub_constant_text``. Masked
    prompts get the answer as a single ranked token.
    """
    if config.kind == BackendKind.STUB_ECHO_GOLD:
        if oracle is None:
            raise ConfigurationError(f"Backend {config.backend_id} needs gold answers to echo")
        if prompt.item_id not in oracle:
            raise IntegrityError("No gold answer for item", [prompt.item_id])
        text = oracle[prompt.item_id]
    elif config.kind == BackendKind.STUB_CONSTANT:
        text = config.stub_constant_text or ""
    else:
        raise ConfigurationError(f"Backend {config.backend_id} of kind {config.kind.value} is not a stub")

    if prompt.mask_token_used is not None:
        return RawResponse(item_id=prompt.item_id, template_id=prompt.template_id,
                           backend_id=config.backend_id, ranked_tokens=((text, 1.0),))
    return RawResponse(item_id=prompt.item_id, template_id=prompt.template_id,
                       backend_id=config.backend_id, text=text)
