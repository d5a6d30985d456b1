"""Wire client for OpenAI-compatible completion/chat endpoints and fill-mask services."""

import json
import logging
import os
import threading
import time
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import httpx

from ..core.errors import BackendError, BackendTimeoutError, ConfigurationError
from ..core.models import BackendConfig, BackendKind, ModelFamily, RawResponse, RenderedPrompt
from .rate_limit import RateLimiter
from .stubs import stub_response

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}

ENDPOINTS = {
    BackendKind.COMPLETION: "completions",
    BackendKind.CHAT: "chat/completions",
    BackendKind.FILL_MASK: "fill-mask",
}


def check_compatible(config: BackendConfig, family: ModelFamily) -> None:
    """Masked templates need a fill-mask backend; every other family needs text generation.

    Raises:
        ConfigurationError: On a kind/family mismatch.
    """
    if config.kind.is_stub:
        return
    if family == ModelFamily.MASKED and config.kind != BackendKind.FILL_MASK:
        raise ConfigurationError(f"Backend {config.backend_id} ({config.kind.value}) cannot serve "
                                 f"masked templates; use a fill_mask backend")
    if family != ModelFamily.MASKED and config.kind == BackendKind.FILL_MASK:
        raise ConfigurationError(f"Backend {config.backend_id} (fill_mask) cannot serve "
                                 f"{family.value} templates")


def family_of(prompt: RenderedPrompt) -> ModelFamily:
    """Rendered prompts remember their mask token only when they came from a masked template."""
    return ModelFamily.MASKED if prompt.mask_token_used is not None else ModelFamily.CAUSAL


def _redacted(headers: Mapping[str, str]) -> Dict[str, str]:
    return {name: ("Bearer ***" if name.lower() == "authorization" else value)
            for name, value in headers.items()}


class BackendClient:
    """Sends rendered prompts to one configured backend.

    Wire kinds retry transport errors, timeouts, 429 and 5xx responses with
    exponential backoff; stub kinds answer locally. ``request_count`` counts
    every HTTP request issued, retries included.
    """

    def __init__(self, config: BackendConfig, transport: Optional[httpx.BaseTransport] = None,
                 oracle: Optional[Mapping[str, str]] = None,
                 sleep: Callable[[float], None] = time.sleep,
                 rate_limiter: Optional[RateLimiter] = None):
        self.config = config
        self.oracle = oracle
        self.logger = logging.getLogger(__name__)
        self._sleep = sleep
        self._count_lock = threading.Lock()
        self.request_count = 0
        self._http: Optional[httpx.Client] = None

        if config.kind.is_stub:
            if config.endpoint_url:
                raise ConfigurationError(f"Stub backend {config.backend_id} must not set endpoint_url")
            self.rate_limiter = None
            return

        if not config.endpoint_url:
            raise ConfigurationError(f"Backend {config.backend_id} ({config.kind.value}) needs endpoint_url")
        self.rate_limiter = rate_limiter
        if self.rate_limiter is None and config.requests_per_second:
            self.rate_limiter = RateLimiter(config.requests_per_second)

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(config.api_key_env) if config.api_key_env else None
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        else:
            self.logger.debug(f"{config.api_key_env} not set, calling {config.backend_id} without auth")
        self._headers = headers
        self._http = httpx.Client(
            base_url=config.endpoint_url.rstrip("/") + "/",
            headers=headers,
            timeout=config.request_timeout,
            transport=transport,
        )

    def __enter__(self) -> "BackendClient":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def close(self) -> None:
        if self._http is not None:
            self._http.close()

    def invoke(self, prompt: RenderedPrompt, family: Optional[ModelFamily] = None) -> RawResponse:
        """Run one prompt through the backend.

        Args:
            prompt: The rendered prompt.
            family: Model family of the template; inferred from the prompt when omitted.

        Raises:
            ConfigurationError: If the backend cannot serve the template's family.
            BackendError: On a non-success response after all retries.
            BackendTimeoutError: If the last attempt timed out.
        """
        check_compatible(self.config, family or family_of(prompt))
        if self.config.kind.is_stub:
            return stub_response(self.config, prompt, self.oracle)

        started = time.monotonic()
        body = self._post(ENDPOINTS[self.config.kind], self._payload(prompt))
        latency = time.monotonic() - started
        text, ranked = self._parse(body)
        return RawResponse(item_id=prompt.item_id, template_id=prompt.template_id,
                           backend_id=self.config.backend_id, text=text, ranked_tokens=ranked,
                           latency=latency)

    def _payload(self, prompt: RenderedPrompt) -> Dict[str, Any]:
        config = self.config
        if config.kind == BackendKind.FILL_MASK:
            return {"model": config.model_name, "prompt": prompt.text,
                    "mask_token": prompt.mask_token_used or config.mask_token, "top_k": config.top_k}
        payload: Dict[str, Any] = {"model": config.model_name}
        if config.kind == BackendKind.CHAT:
            payload["messages"] = [{"role": "user", "content": prompt.text}]
        else:
            payload["prompt"] = prompt.text
        payload["temperature"] = config.temperature
        payload["max_tokens"] = config.max_output_tokens
        return payload

    def _post(self, endpoint: str, payload: Dict[str, Any]) -> Dict[str, Any]:
        attempts = self.config.max_retries + 1
        last_error: Optional[BackendError] = None
        for attempt in range(attempts):
            if attempt:
                delay = self.config.backoff_seconds * 2 ** (attempt - 1)
                self.logger.warning(f"Retrying {self.config.backend_id} in {delay:.1f}s "
                                    f"(attempt {attempt + 1}/{attempts}): {last_error}")
                self._sleep(delay)
            if self.rate_limiter is not None:
                self.rate_limiter.acquire()
            with self._count_lock:
                self.request_count += 1
            self.logger.debug(f"POST {endpoint} headers={_redacted(self._headers)} "
                              f"body={json.dumps(payload, ensure_ascii=False)}")
            try:
                response = self._http.post(endpoint, json=payload)
            except httpx.TimeoutException as e:
                last_error = BackendTimeoutError(f"Backend {self.config.backend_id} timed out ({e})")
                continue
            except httpx.TransportError as e:
                last_error = BackendError(f"Backend {self.config.backend_id} unreachable ({e})")
                continue

            self.logger.debug(f"Response {response.status_code}: {response.text[:1000]}")
            if response.status_code in RETRYABLE_STATUS:
                last_error = BackendError(f"Backend {self.config.backend_id} failed",
                                          response.status_code, response.text)
                continue
            if not response.is_success:
                raise BackendError(f"Backend {self.config.backend_id} rejected the request",
                                   response.status_code, response.text)
            try:
                return response.json()
            except ValueError:
                raise BackendError(f"Backend {self.config.backend_id} returned invalid JSON",
                                   response.status_code, response.text)
        raise last_error

    def _parse(self, body: Dict[str, Any]) -> Tuple[Optional[str], Optional[Tuple[Tuple[str, float], ...]]]:
        try:
            if self.config.kind == BackendKind.FILL_MASK:
                tokens = sorted(((str(t["token"]), float(t["score"])) for t in body["tokens"]),
                                key=lambda pair: -pair[1])
                if not tokens:
                    raise BackendError(f"Backend {self.config.backend_id} returned no mask tokens")
                return None, tuple(tokens)
            choice = body["choices"][0]
            if self.config.kind == BackendKind.CHAT:
                return choice["message"].get("content") or "", None
            return choice.get("text") or "", None
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise BackendError(f"Unexpected response shape from {self.config.backend_id} ({e!r})",
                               body=json.dumps(body)[:500])


def invoke(config: BackendConfig, prompt: RenderedPrompt, family: Optional[ModelFamily] = None,
           oracle: Optional[Mapping[str, str]] = None) -> RawResponse:
    """One-shot convenience wrapper around ``BackendClient.invoke``."""
    with BackendClient(config, oracle=oracle) as client:
        return client.invoke(prompt, family)
