"""Request/response records and usage accounting for chat-completion calls."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    temperature: float = 0.0
    max_output_tokens: int = 4096
    want_logprobs: bool = False

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


@dataclass(frozen=True)
class UsageRecord:
    input_tokens: int = 0
    output_tokens: int = 0
    latency: float = 0.0
    cost: float = 0.0
    estimated: bool = False

    def __post_init__(self) -> None:
        if min(self.input_tokens, self.output_tokens) < 0 or self.latency < 0 or self.cost < 0:
            raise ValueError("usage fields must be >= 0")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    token_logprobs: tuple[tuple[str, float], ...] | None = None
    usage: UsageRecord = field(default_factory=UsageRecord)

    def __post_init__(self) -> None:
        if self.token_logprobs is not None:
            for tok, lp in self.token_logprobs:
                if lp > 0:
                    raise ValueError(f"log probability {lp} > 0 for token {tok!r}")


@dataclass(frozen=True)
class PriceTable:
    model_name: str
    price_in: float = 0.0
    price_out: float = 0.0

    def __post_init__(self) -> None:
        if self.price_in < 0 or self.price_out < 0:
            raise ValueError("prices must be >= 0")

    def cost(self, input_tokens: int, output_tokens: int) -> float:
        return input_tokens * self.price_in + output_tokens * self.price_out


def aggregate_usage(records: list[UsageRecord] | tuple[UsageRecord, ...]) -> UsageRecord:
    """Fieldwise totals; the empty list aggregates to the zero record."""
    return UsageRecord(
        input_tokens=sum(r.input_tokens for r in records),
        output_tokens=sum(r.output_tokens for r in records),
        latency=sum(r.latency for r in records),
        cost=sum(r.cost for r in records),
        estimated=any(r.estimated for r in records),
    )


def estimate_tokens(text: str) -> int:
    """Whitespace-delimited approximation, used when the provider omits usage."""
    return len(text.split())


__all__ = [
    "ChatRequest",
    "ChatResponse",
    "PriceTable",
    "UsageRecord",
    "aggregate_usage",
    "estimate_tokens",
]
