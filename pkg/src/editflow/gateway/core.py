"""Provider-agnostic gateway: retries, rate limiting, pricing, usage ledger."""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from editflow.errors import GatewayError, RateLimitedError
from editflow.gateway.types import ChatRequest, ChatResponse, PriceTable, UsageRecord, aggregate_usage


class Provider(Protocol):
    name: str

    def complete(self, req: ChatRequest) -> ChatResponse: ...


_TRANSIENT = (httpx.TransportError, httpx.TimeoutException, RateLimitedError)


@dataclass
class Gateway:
    """Front door for all model calls; every call lands in the usage ledger.

    ``deterministic_timing`` replaces wall-clock latency with the provider's
    self-reported value so scripted runs serialize bit-identically.
    """

    provider: Provider
    price_table: PriceTable | None = None
    max_retries: int = 2
    backoff_base: float = 0.2
    rate_limit_per_minute: int | None = None
    deterministic_timing: bool = False
    ledger: list[UsageRecord] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _dispatch_times: deque = field(default_factory=deque, repr=False)

    def _throttle(self) -> None:
        if self.rate_limit_per_minute is None:
            return
        with self._lock:
            now = time.monotonic()
            while self._dispatch_times and now - self._dispatch_times[0] > 60.0:
                self._dispatch_times.popleft()
            wait = 0.0
            if len(self._dispatch_times) >= self.rate_limit_per_minute:
                wait = self._dispatch_times[0] + 60.0 - now
            self._dispatch_times.append(max(now, now + wait))
        if wait > 0:
            time.sleep(wait)

    def _record(self, usage: UsageRecord) -> None:
        with self._lock:
            self.ledger.append(usage)

    def complete(self, req: ChatRequest) -> ChatResponse:
        """Run one chat call, retrying transient transport failures."""
        start = time.perf_counter()
        attempt = 0
        while True:
            self._throttle()
            try:
                resp = self.provider.complete(req)
                break
            except _TRANSIENT as exc:
                if attempt >= self.max_retries:
                    elapsed = max(time.perf_counter() - start, 1e-9)
                    self._record(UsageRecord(latency=elapsed))
                    if isinstance(exc, RateLimitedError):
                        raise
                    raise RateLimitedError(
                        f"transport failures exhausted {self.max_retries} retries: {exc}"
                    ) from exc
                if not self.deterministic_timing:
                    time.sleep(self.backoff_base * (2 ** attempt))
                attempt += 1
            except GatewayError:
                elapsed = max(time.perf_counter() - start, 1e-9)
                self._record(UsageRecord(latency=elapsed))
                raise

        if self.deterministic_timing:
            latency = resp.usage.latency
        else:
            latency = time.perf_counter() - start
        cost = (
            self.price_table.cost(resp.usage.input_tokens, resp.usage.output_tokens)
            if self.price_table
            else 0.0
        )
        usage = UsageRecord(
            input_tokens=resp.usage.input_tokens,
            output_tokens=resp.usage.output_tokens,
            latency=latency,
            cost=cost,
            estimated=resp.usage.estimated,
        )
        self._record(usage)
        return ChatResponse(text=resp.text, token_logprobs=resp.token_logprobs, usage=usage)

    def session_usage(self) -> UsageRecord:
        with self._lock:
            return aggregate_usage(list(self.ledger))

    def ledger_mark(self) -> int:
        with self._lock:
            return len(self.ledger)

    def usage_since(self, mark: int) -> UsageRecord:
        with self._lock:
            return aggregate_usage(self.ledger[mark:])


__all__ = ["Gateway", "Provider"]
