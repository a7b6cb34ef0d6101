"""SUT handles: the scripted mock, replay-from-file, and subprocess adapters."""

from __future__ import annotations

import json
import random
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from editflow.corpus.model import Commit, EditHunk
from editflow.corpus.workspace import Workspace, _OffsetRecord
from editflow.errors import SutFailure
from editflow.flow.classify import PredictedEdit
from editflow.flow.graph import FlowGraph, successors
from editflow.gateway.types import UsageRecord
from editflow.twin.protocol import (
    RecommendationBatch,
    SutRequest,
    batch_from_dict,
    batch_to_dict,
    request_to_dict,
)


class Sut(Protocol):
    sut_id: str

    def recommend(self, req: SutRequest) -> RecommendationBatch: ...


@dataclass(frozen=True)
class NoiseProfile:
    """Per-emission probabilities of synthesizing a flow-violating edit."""

    break_rate: float = 0.0
    jump_rate: float = 0.0
    revert_rate: float = 0.0

    def __post_init__(self) -> None:
        rates = (self.break_rate, self.jump_rate, self.revert_rate)
        if any(not 0 <= r <= 1 for r in rates) or sum(rates) > 1:
            raise ValueError("rates must be in [0,1] and sum to <= 1")


def _shadow_workspace(commit: Commit, applied_ids: list[str]) -> Workspace:
    """Offset table for the given applied sequence, without touching disk."""
    ws = Workspace(root=Path("/nonexistent"))
    by_id = {h.id: h for h in commit.hunks}
    for hid in applied_ids:
        h = by_id[hid]
        ws.offsets.setdefault(h.file, []).append(
            _OffsetRecord(h.line_start, h.line_end, h.delta, h.id)
        )
        ws.offsets[h.file].sort(key=lambda r: (r.line_start, r.line_end))
        ws.applied.append(hid)
    return ws


def _as_prediction(h: EditHunk, ws: Workspace, rank: int) -> PredictedEdit:
    start, end = ws.current_range(h)
    # An applied hunk's region currently holds its post content, so an edit
    # proposed there must cite that as the text being replaced.
    pre = h.content_post if h.id in ws.applied else h.content_pre
    return PredictedEdit(
        file=h.file,
        line_start=start,
        line_end=end,
        content_pre=pre,
        content_post=h.content_post,
        source_rank=rank,
    )


@dataclass
class MockSut:
    """Graph-aware test double emitting a configurable flow-category mix.

    Each emission slot independently draws a category from the noise profile
    (remainder mass goes to flow-keeping suggestions) and synthesizes an edit
    of that kind from the ground truth. All state is derived from the request,
    so behavior depends only on (seed, query index, prior edits).
    """

    graph: FlowGraph
    commit: Commit
    noise: NoiseProfile = field(default_factory=NoiseProfile)
    seed: int = 0
    emissions_per_query: int = 3
    usage_per_query: UsageRecord = field(
        default_factory=lambda: UsageRecord(input_tokens=50, output_tokens=20)
    )
    sut_id: str = "mock"
    _queries: int = 0
    _noise_counter: int = 0

    def recommend(self, req: SutRequest) -> RecommendationBatch:
        rng = random.Random(f"{self.seed}:{self._queries}")
        self._queries += 1
        applied = [h.id for h in req.prior_edits]
        ws = _shadow_workspace(self.commit, applied)
        prior = set(applied)
        succ = sorted(successors(self.graph, prior))
        unapplied = sorted(self.graph.nodes - prior)
        jump_pool = sorted(set(unapplied) - set(succ))

        edits: list[PredictedEdit] = []
        for slot in range(self.emissions_per_query):
            u = rng.random()
            if u < self.noise.break_rate:
                kind = "break"
            elif u < self.noise.break_rate + self.noise.jump_rate:
                kind = "jump"
            elif u < self.noise.break_rate + self.noise.jump_rate + self.noise.revert_rate:
                kind = "revert"
            else:
                kind = "keep"

            if kind == "jump" and not jump_pool:
                kind = "keep"
            if kind == "keep" and not succ:
                kind = "break"
            if kind == "revert" and not applied:
                kind = "break"

            if kind == "keep":
                h = self.commit.hunk(rng.choice(succ))
                edits.append(_as_prediction(h, ws, rank=slot))
            elif kind == "jump":
                h = self.commit.hunk(rng.choice(jump_pool))
                edits.append(_as_prediction(h, ws, rank=slot))
            elif kind == "revert":
                # Revert proposals arrive as the inverse edit, the way real
                # SUTs express undoing a change.
                h = self.commit.hunk(rng.choice(sorted(applied)))
                start, end = ws.current_range(h)
                edits.append(
                    PredictedEdit(
                        file=h.file,
                        line_start=start,
                        line_end=max(end, start - 1),
                        content_pre=h.content_post,
                        content_post=h.content_pre,
                        source_rank=slot,
                    )
                )
            else:
                h = self.commit.hunk(rng.choice(sorted(self.graph.nodes)))
                start, end = ws.current_range(h)
                self._noise_counter += 1
                noise_line = f"# synthesized noise {self._noise_counter}\n"
                edits.append(
                    PredictedEdit(
                        file=h.file,
                        line_start=start,
                        line_end=end,
                        content_pre=h.content_post if h.id in ws.applied else h.content_pre,
                        content_post=noise_line + h.content_post,
                        source_rank=slot,
                    )
                )
        return RecommendationBatch(edits=tuple(edits), usage=self.usage_per_query)


@dataclass
class ReplaySut:
    """Plays back scripted batches keyed by query index; silent when exhausted."""

    batches: dict[int, RecommendationBatch]
    sut_id: str = "replay"
    _queries: int = 0

    def recommend(self, req: SutRequest) -> RecommendationBatch:
        index = self._queries
        self._queries += 1
        return self.batches.get(index, RecommendationBatch())


def load_replay_script(path: Path) -> ReplaySut:
    """Script file: {"steps": [{"index": N, "edits": [...], "usage": {...}}]}."""
    data = json.loads(Path(path).read_text())
    batches = {
        step["index"]: batch_from_dict({**step, "protocol_version": step.get("protocol_version", 1)})
        for step in data["steps"]
    }
    return ReplaySut(batches=batches)


@dataclass
class SubprocessSut:
    """Spawns a command per query, speaking the stdio JSON protocol."""

    command: str | list[str]
    timeout: float = 60.0
    sut_id: str = "subprocess"

    def recommend(self, req: SutRequest) -> RecommendationBatch:
        argv = shlex.split(self.command) if isinstance(self.command, str) else list(self.command)
        payload = json.dumps(request_to_dict(req))
        start = time.perf_counter()
        try:
            proc = subprocess.run(
                argv,
                input=payload.encode("utf-8"),
                capture_output=True,
                timeout=self.timeout,
            )
        except subprocess.TimeoutExpired as exc:
            raise SutFailure(f"timeout after {self.timeout}s") from exc
        except OSError as exc:
            raise SutFailure(f"cannot spawn {argv[0]}: {exc}") from exc
        if proc.returncode != 0:
            raise SutFailure(
                f"exit code {proc.returncode}: {proc.stderr.decode('utf-8', 'replace')[:200]}"
            )
        try:
            batch = batch_from_dict(json.loads(proc.stdout.decode("utf-8")))
        except (ValueError, KeyError, TypeError) as exc:
            raise SutFailure(f"malformed output: {exc}") from exc
        if batch.usage.latency == 0.0:
            elapsed = time.perf_counter() - start
            batch = RecommendationBatch(
                edits=batch.edits,
                usage=UsageRecord(
                    input_tokens=batch.usage.input_tokens,
                    output_tokens=batch.usage.output_tokens,
                    latency=elapsed,
                    cost=batch.usage.cost,
                    estimated=batch.usage.estimated,
                ),
            )
        return batch


def write_replay_script(batches: dict[int, RecommendationBatch], path: Path) -> None:
    steps = [
        {"index": i, **batch_to_dict(b)}
        for i, b in sorted(batches.items())
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"steps": steps}, indent=2) + "\n")


__all__ = [
    "MockSut",
    "NoiseProfile",
    "ReplaySut",
    "SubprocessSut",
    "Sut",
    "load_replay_script",
    "write_replay_script",
]
