from editflow.gateway.types import (
    ChatRequest,
    ChatResponse,
    PriceTable,
    UsageRecord,
    aggregate_usage,
    estimate_tokens,
)
from editflow.gateway.mock import MockProvider, load_mock_script
from editflow.gateway.http import HttpProvider
from editflow.gateway.core import Gateway

__all__ = [
    "ChatRequest",
    "ChatResponse",
    "Gateway",
    "HttpProvider",
    "MockProvider",
    "PriceTable",
    "UsageRecord",
    "aggregate_usage",
    "estimate_tokens",
    "load_mock_script",
]
