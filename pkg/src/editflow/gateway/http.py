"""Chat-completions HTTP provider (OpenAI-compatible request/response bodies)."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import httpx

from editflow.errors import AuthFailureError, MalformedResponseError, RateLimitedError
from editflow.gateway.types import ChatRequest, ChatResponse, UsageRecord, estimate_tokens

API_KEY_ENV = "EDITFLOW_API_KEY"


@dataclass
class HttpProvider:
    endpoint: str
    model: str
    api_key: str | None = None
    timeout: float = 120.0
    name: str = "http"
    _client: httpx.Client | None = field(default=None, repr=False)

    def _key(self) -> str:
        key = os.environ.get(API_KEY_ENV) or self.api_key
        if not key:
            raise AuthFailureError(f"no credential: set {API_KEY_ENV} or configure api_key")
        return key

    def client(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client(timeout=self.timeout)
        return self._client

    def complete(self, req: ChatRequest) -> ChatResponse:
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }
        if req.want_logprobs:
            body["logprobs"] = True
        resp = self.client().post(
            self.endpoint,
            json=body,
            headers={"Authorization": f"Bearer {self._key()}"},
        )
        if resp.status_code in (401, 403):
            raise AuthFailureError(f"provider returned {resp.status_code}")
        if resp.status_code == 429:
            raise RateLimitedError("provider throttled the request")
        if resp.status_code >= 500:
            raise httpx.TransportError(f"server error {resp.status_code}")
        if resp.status_code != 200:
            raise MalformedResponseError(f"unexpected status {resp.status_code}: {resp.text[:200]}")

        try:
            data = resp.json()
            choice = data["choices"][0]
            text = choice["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise MalformedResponseError(f"cannot decode response: {exc}") from exc

        logprobs = None
        lp_block = (choice.get("logprobs") or {}).get("content")
        if req.want_logprobs and lp_block:
            try:
                logprobs = tuple((t["token"], float(t["logprob"])) for t in lp_block)
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedResponseError(f"cannot decode logprobs: {exc}") from exc

        usage = data.get("usage") or {}
        estimated = "prompt_tokens" not in usage
        input_tokens = usage.get(
            "prompt_tokens", estimate_tokens(req.system) + estimate_tokens(req.user)
        )
        output_tokens = usage.get("completion_tokens", estimate_tokens(text))
        return ChatResponse(
            text=text,
            token_logprobs=logprobs,
            usage=UsageRecord(
                input_tokens=input_tokens,
                output_tokens=output_tokens,
                estimated=estimated,
            ),
        )


__all__ = ["API_KEY_ENV", "HttpProvider"]
