"""Model backends, response cache and dispatcher."""

from .cache import ResponseCache, cache_key, invoke_cached
from .client import BackendClient, check_compatible, invoke
from .dispatcher import dispatch, iter_dispatch
from .rate_limit import RateLimiter
from .responses import read_responses, response_to_dict
from .stubs import gold_answer, stub_response

__all__ = [
    "BackendClient",
    "RateLimiter",
    "ResponseCache",
    "cache_key",
    "check_compatible",
    "dispatch",
    "gold_answer",
    "invoke",
    "invoke_cached",
    "iter_dispatch",
    "read_responses",
    "response_to_dict",
    "stub_response",
]
