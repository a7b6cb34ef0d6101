"""The SUT wire protocol: one JSON request in, one JSON batch out.

Request document (``protocol_version`` 1)::

    {
      "protocol_version": 1,
      "workspace_root": "<absolute path of the editable tree>",
      "description": "<commit message driving the editing session>",
      "prior_edits": [
        {"id": "...", "file": "...", "line_start": N, "line_end": N,
         "content_pre": "...", "content_post": "...", "structural_path": "..."},
        ...
      ]
    }

Prior-edit line numbers are in the *current* workspace frame (the region the
edit's post content now occupies). Response document::

    {
      "protocol_version": 1,
      "edits": [
        {"file": "...", "line_start": N, "line_end": N,
         "content_pre": "...", "content_post": "...", "source_rank": N},
        ...
      ],
      "usage": {"input_tokens": N, "output_tokens": N, "latency": S, "cost": C}
    }

``usage`` is optional and defaults to zero; ``source_rank`` defaults to the
edit's position in the list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from editflow.corpus.model import EditHunk
from editflow.flow.classify import PredictedEdit
from editflow.gateway.types import UsageRecord

PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class SutRequest:
    workspace_root: str
    prior_edits: tuple[EditHunk, ...]
    description: str


@dataclass(frozen=True)
class RecommendationBatch:
    edits: tuple[PredictedEdit, ...] = ()
    usage: UsageRecord = field(default_factory=UsageRecord)


def request_to_dict(req: SutRequest) -> dict:
    return {
        "protocol_version": PROTOCOL_VERSION,
        "workspace_root": req.workspace_root,
        "description": req.description,
        "prior_edits": [
            {
                "id": h.id,
                "file": h.file,
                "line_start": h.line_start,
                "line_end": h.line_end,
                "content_pre": h.content_pre,
                "content_post": h.content_post,
                "structural_path": h.structural_path,
            }
            for h in req.prior_edits
        ],
    }


def request_from_dict(data: dict) -> SutRequest:
    return SutRequest(
        workspace_root=data["workspace_root"],
        description=data["description"],
        prior_edits=tuple(
            EditHunk(
                id=e["id"],
                file=e["file"],
                line_start=e["line_start"],
                line_end=e["line_end"],
                content_pre=e["content_pre"],
                content_post=e["content_post"],
                structural_path=e.get("structural_path", ""),
            )
            for e in data["prior_edits"]
        ),
    )


def usage_to_dict(u: UsageRecord) -> dict:
    return {
        "input_tokens": u.input_tokens,
        "output_tokens": u.output_tokens,
        "latency": u.latency,
        "cost": u.cost,
        "estimated": u.estimated,
    }


def usage_from_dict(data: dict | None) -> UsageRecord:
    data = data or {}
    return UsageRecord(
        input_tokens=data.get("input_tokens", 0),
        output_tokens=data.get("output_tokens", 0),
        latency=data.get("latency", 0.0),
        cost=data.get("cost", 0.0),
        estimated=data.get("estimated", False),
    )


def edit_to_dict(p: PredictedEdit) -> dict:
    return {
        "file": p.file,
        "line_start": p.line_start,
        "line_end": p.line_end,
        "content_pre": p.content_pre,
        "content_post": p.content_post,
        "source_rank": p.source_rank,
    }


def edit_from_dict(data: dict, default_rank: int = 0) -> PredictedEdit:
    return PredictedEdit(
        file=data["file"],
        line_start=data["line_start"],
        line_end=data["line_end"],
        content_pre=data.get("content_pre", ""),
        content_post=data.get("content_post", ""),
        source_rank=data.get("source_rank", default_rank),
    )


def batch_to_dict(batch: RecommendationBatch) -> dict:
    return {
        "protocol_version": PROTOCOL_VERSION,
        "edits": [edit_to_dict(p) for p in batch.edits],
        "usage": usage_to_dict(batch.usage),
    }


def batch_from_dict(data: dict) -> RecommendationBatch:
    version = data.get("protocol_version", PROTOCOL_VERSION)
    if version != PROTOCOL_VERSION:
        raise ValueError(f"unsupported protocol_version {version}")
    return RecommendationBatch(
        edits=tuple(
            edit_from_dict(e, default_rank=i) for i, e in enumerate(data.get("edits", ()))
        ),
        usage=usage_from_dict(data.get("usage")),
    )


__all__ = [
    "PROTOCOL_VERSION",
    "RecommendationBatch",
    "SutRequest",
    "batch_from_dict",
    "batch_to_dict",
    "edit_from_dict",
    "edit_to_dict",
    "request_from_dict",
    "request_to_dict",
    "usage_from_dict",
    "usage_to_dict",
]
