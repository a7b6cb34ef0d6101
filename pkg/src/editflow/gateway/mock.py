"""Deterministic scripted provider for offline runs and tests.

Routing order: an optional handler hook, then exact keys on the user text,
then regex routes matched against ``system + "\\n" + user`` (first hit wins),
then the default response. Regex route responses may use backreferences
(``\\1``, ``\\g<name>``) which are expanded from the match, so scripts can
echo request fragments back. Output is a pure function of
(system, user, temperature bucket), making replays bit-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from editflow.gateway.types import ChatRequest, ChatResponse, UsageRecord, estimate_tokens


@dataclass(frozen=True)
class MockRoute:
    match: str
    response: str
    kind: str = "regex"  # "exact" (user text equality) or "regex"
    # Either bare floats (paired with whitespace-delimited tokens of the
    # response, counts must agree) or explicit (token, logprob) pairs.
    logprobs: tuple[float, ...] | tuple[tuple[str, float], ...] | None = None


def _stable_logprob(token: str, position: int, salt: str) -> float:
    digest = hashlib.md5(f"{salt}:{position}:{token}".encode()).digest()
    return -0.01 - (digest[0] % 200) / 100.0


def synthesize_logprobs(text: str, salt: str = "") -> tuple[tuple[str, float], ...]:
    """Deterministic per-token logprobs over whitespace-delimited tokens."""
    return tuple(
        (tok, _stable_logprob(tok, i, salt)) for i, tok in enumerate(text.split())
    )


@dataclass
class MockProvider:
    """Keyed-response table with regex-route fallback."""

    routes: list[MockRoute] = field(default_factory=list)
    default_response: str = '{"label": "unrelated", "rationale": "no route"}'
    handler: Callable[[ChatRequest], str | None] | None = None
    latency: float = 0.0
    name: str = "mock"

    def _resolve(self, req: ChatRequest) -> tuple[str, tuple[float, ...] | None]:
        if self.handler is not None:
            out = self.handler(req)
            if out is not None:
                return out, None
        probe = req.system + "\n" + req.user
        for route in self.routes:
            if route.kind == "exact":
                if req.user == route.match:
                    return route.response, route.logprobs
            else:
                m = re.search(route.match, probe, re.DOTALL)
                if m:
                    return m.expand(route.response), route.logprobs
        return self.default_response, None

    def complete(self, req: ChatRequest) -> ChatResponse:
        text, explicit_lps = self._resolve(req)
        bucket = f"{req.temperature:.1f}"
        if explicit_lps is None:
            logprobs = synthesize_logprobs(text, salt=f"{bucket}:{req.system}:{req.user}")
        elif explicit_lps and isinstance(explicit_lps[0], (tuple, list)):
            logprobs = tuple((str(t), float(lp)) for t, lp in explicit_lps)
        else:
            tokens = text.split()
            if len(explicit_lps) != len(tokens):
                raise ValueError(
                    f"route logprobs length {len(explicit_lps)} != token count {len(tokens)}"
                )
            logprobs = tuple(zip(tokens, (float(lp) for lp in explicit_lps)))
        return ChatResponse(
            text=text,
            token_logprobs=logprobs if req.want_logprobs else None,
            usage=UsageRecord(
                input_tokens=estimate_tokens(req.system) + estimate_tokens(req.user),
                output_tokens=len(logprobs),
                latency=self.latency,
                estimated=True,
            ),
        )


def load_mock_script(path: Path) -> MockProvider:
    """Build a provider from a JSON script: a list of {match, response, ...} entries."""
    data = json.loads(Path(path).read_text())
    entries = data["entries"] if isinstance(data, dict) else data
    routes = [
        MockRoute(
            match=e["match"],
            response=e["response"],
            kind=e.get("kind", "regex"),
            logprobs=tuple(
                tuple(x) if isinstance(x, list) else x for x in e["logprobs"]
            )
            if e.get("logprobs") is not None
            else None,
        )
        for e in entries
    ]
    default = data.get("default") if isinstance(data, dict) else None
    provider = MockProvider(routes=routes)
    if default is not None:
        provider.default_response = default
    return provider


__all__ = ["MockProvider", "MockRoute", "load_mock_script", "synthesize_logprobs"]
