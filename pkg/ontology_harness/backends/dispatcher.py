"""Bounded, order-preserving prompt dispatch."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterator, List, Optional, Sequence

from tqdm import tqdm

from ..core.models import ModelFamily, RawResponse, RenderedPrompt
from .cache import ResponseCache, invoke_cached
from .client import BackendClient

logger = logging.getLogger(__name__)


def iter_dispatch(client: BackendClient, prompts: Sequence[RenderedPrompt],
                  cache: Optional[ResponseCache] = None, parallelism: int = 4,
                  family: Optional[ModelFamily] = None, progress: bool = True) -> Iterator[RawResponse]:
    """Yield one response per prompt, in input order.

    At most ``parallelism`` prompts are in flight at once. If a prompt fails,
    the responses before it have already been yielded and the error is
    raised; prompts not yet started are cancelled.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be at least 1, got {parallelism}")

    def call(prompt: RenderedPrompt) -> RawResponse:
        if cache is not None:
            return invoke_cached(client, prompt, cache, family)
        return client.invoke(prompt, family)

    logger.info(f"Dispatching {len(prompts)} prompts to {client.config.backend_id} "
                f"with parallelism {parallelism}")
    executor = ThreadPoolExecutor(max_workers=parallelism, thread_name_prefix="dispatch")
    try:
        with tqdm(total=len(prompts), desc=client.config.backend_id, unit=" prompts",
                  disable=None if progress else True) as bar:
            for response in executor.map(call, prompts):
                bar.update(1)
                yield response
    finally:
        executor.shutdown(wait=True, cancel_futures=True)


def dispatch(client: BackendClient, prompts: Sequence[RenderedPrompt],
             cache: Optional[ResponseCache] = None, parallelism: int = 4,
             family: Optional[ModelFamily] = None) -> List[RawResponse]:
    return list(iter_dispatch(client, prompts, cache, parallelism, family))
