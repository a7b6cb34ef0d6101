"""Replay a commit's editing process against a SUT and record the full trace.

Protocol per run: materialize the pre-change tree, apply a random
minimum-in-degree hunk as the opening edit, then loop: query the SUT with the
current state, (optionally) post-process the batch, classify every evaluated
prediction, apply a randomly chosen flow-keeping suggestion if one exists and
otherwise a random one-hop successor (or, for disconnected graphs, a random
remaining hunk, flagged), until every ground-truth hunk has been applied.
All randomness derives from the run seed.
"""

from __future__ import annotations

import json
import random
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from editflow.corpus.gitio import materialize_pre_state
from editflow.corpus.model import Commit, EditHunk
from editflow.corpus.workspace import Workspace, apply_hunk, materialize_tree
from editflow.errors import SutFailure
from editflow.flow.classify import FlowCategory, classify, match_edit
from editflow.flow.graph import FlowGraph, min_indegree_candidates, successors
from editflow.gateway.types import UsageRecord, aggregate_usage
from editflow.twin.protocol import (
    RecommendationBatch,
    SutRequest,
    batch_from_dict,
    batch_to_dict,
    usage_from_dict,
    usage_to_dict,
)
from editflow.twin.suts import Sut

if TYPE_CHECKING:
    from editflow.filtering import FilterDecision, FlowFilter


@dataclass(frozen=True)
class SimConfig:
    seed: int
    with_filter: bool = False
    batch_cap: int = 10
    sut_id: str = "sut"

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "with_filter": self.with_filter,
            "batch_cap": self.batch_cap,
            "sut_id": self.sut_id,
        }


@dataclass(frozen=True)
class SimulationStep:
    index: int
    prior: tuple[str, ...]
    batch: RecommendationBatch
    classifications: tuple[FlowCategory, ...]
    chosen: str
    chosen_source: str  # "seed" | "keep_pick" | "fallback_successor" | "fallback_disconnected"
    matched: tuple[str | None, ...] = ()
    filter_decisions: "tuple[FilterDecision, ...] | None" = None
    filter_usage: UsageRecord | None = None
    sut_failure: bool = False


@dataclass(frozen=True)
class SimulationTrace:
    commit_id: str
    config: dict
    steps: tuple[SimulationStep, ...]
    totals: UsageRecord


def _prior_edit_view(commit: Commit, ws: Workspace, applied: list[str]) -> tuple[EditHunk, ...]:
    """Applied hunks with line numbers shifted into the current frame.

    The range keeps the edit's own shape (its pre-change span) so the tuple
    stays a valid hunk; ``line_start`` is where the region now begins.
    """
    out = []
    for hid in applied:
        h = commit.hunk(hid)
        start, _ = ws.current_range(h)
        end = start + h.pre_line_span - 1
        out.append(
            EditHunk(
                id=h.id,
                file=h.file,
                line_start=start,
                line_end=end,
                content_pre=h.content_pre,
                content_post=h.content_post,
                structural_path=h.structural_path,
            )
        )
    return tuple(out)


def _query(sut: Sut, req: SutRequest) -> tuple[RecommendationBatch, bool]:
    """One SUT query with a single retry; failures degrade to an empty batch."""
    for attempt in (0, 1):
        try:
            return sut.recommend(req), False
        except SutFailure:
            if attempt == 1:
                return RecommendationBatch(), True
    raise AssertionError("unreachable")


def simulate(
    commit: Commit,
    g: FlowGraph,
    sut: Sut,
    cfg: SimConfig,
    flow_filter: "FlowFilter | None" = None,
    *,
    workdir: Path | None = None,
    pre_state: dict[str, str] | None = None,
) -> SimulationTrace:
    """Run one full editing session; returns the per-step record.

    ``pre_state`` supplies the parent tree directly (path -> text) for
    commits not backed by a repository clone; otherwise the parent revision
    is checked out from ``commit.repo``.
    """
    if set(g.nodes) != set(commit.hunk_ids()):
        raise ValueError("graph nodes do not match commit hunks")
    if flow_filter is None and cfg.with_filter:
        raise ValueError("with_filter set but no flow_filter supplied")

    if workdir is None:
        tmp = tempfile.TemporaryDirectory(prefix="editflow-sim-")
        root = Path(tmp.name)
    else:
        tmp = None
        root = Path(workdir)
    try:
        if pre_state is not None:
            ws = materialize_tree(pre_state, root)
        else:
            ws = materialize_pre_state(commit, root)

        rng = random.Random(cfg.seed)
        seed_choice = rng.choice(sorted(min_indegree_candidates(g)))
        apply_hunk(ws, commit.hunk(seed_choice))
        applied: list[str] = [seed_choice]
        steps: list[SimulationStep] = [
            SimulationStep(
                index=0,
                prior=(),
                batch=RecommendationBatch(),
                classifications=(),
                chosen=seed_choice,
                chosen_source="seed",
            )
        ]

        usages: list[UsageRecord] = []
        step_index = 1
        while len(applied) < len(commit.hunks):
            prior = set(applied)
            req = SutRequest(
                workspace_root=str(ws.root),
                prior_edits=_prior_edit_view(commit, ws, applied),
                description=commit.message,
            )
            raw_batch, failed = _query(sut, req)
            if len(raw_batch.edits) > cfg.batch_cap:
                raw_batch = RecommendationBatch(
                    edits=raw_batch.edits[: cfg.batch_cap], usage=raw_batch.usage
                )
            usages.append(raw_batch.usage)

            filter_decisions = None
            filter_usage = None
            if flow_filter is not None:
                outcome = flow_filter.apply(commit.hunk(applied[-1]), raw_batch, step_index)
                eval_batch = RecommendationBatch(edits=outcome.kept, usage=raw_batch.usage)
                filter_decisions = outcome.decisions
                filter_usage = outcome.usage
                usages.append(outcome.usage)
            else:
                eval_batch = raw_batch

            matched: list[str | None] = []
            classifications: list[FlowCategory] = []
            keep_indices: list[int] = []
            for i, p in enumerate(eval_batch.edits):
                m = match_edit(p, commit, ws)
                category = classify(p, prior, g, commit, ws)
                matched.append(m.hunk_id if m else None)
                classifications.append(category)
                if category is FlowCategory.KEEP:
                    keep_indices.append(i)

            if keep_indices:
                pick = rng.choice(keep_indices)
                chosen = matched[pick]
                source = "keep_pick"
            else:
                succ = sorted(successors(g, prior))
                if succ:
                    chosen = rng.choice(succ)
                    source = "fallback_successor"
                else:
                    remaining = sorted(set(commit.hunk_ids()) - prior)
                    chosen = rng.choice(remaining)
                    source = "fallback_disconnected"

            apply_hunk(ws, commit.hunk(chosen))
            steps.append(
                SimulationStep(
                    index=step_index,
                    prior=tuple(applied),
                    batch=eval_batch,
                    classifications=tuple(classifications),
                    chosen=chosen,
                    chosen_source=source,
                    matched=tuple(matched),
                    filter_decisions=filter_decisions,
                    filter_usage=filter_usage,
                    sut_failure=failed,
                )
            )
            applied.append(chosen)
            step_index += 1

        return SimulationTrace(
            commit_id=commit.commit_id,
            config=cfg.to_dict(),
            steps=tuple(steps),
            totals=aggregate_usage(usages),
        )
    finally:
        if tmp is not None:
            tmp.cleanup()


# --- trace files ---------------------------------------------------------------

TRACE_SCHEMA = "editflow-trace/1"


def trace_to_dict(trace: SimulationTrace) -> dict:
    return {
        "schema": TRACE_SCHEMA,
        "commit_id": trace.commit_id,
        "config": trace.config,
        "totals": usage_to_dict(trace.totals),
        "steps": [
            {
                "index": s.index,
                "prior": list(s.prior),
                "batch": batch_to_dict(s.batch),
                "classifications": [c.value for c in s.classifications],
                "matched": list(s.matched),
                "chosen": s.chosen,
                "chosen_source": s.chosen_source,
                "filter_decisions": (
                    [d.to_dict() for d in s.filter_decisions]
                    if s.filter_decisions is not None
                    else None
                ),
                "filter_usage": usage_to_dict(s.filter_usage) if s.filter_usage else None,
                "sut_failure": s.sut_failure,
            }
            for s in trace.steps
        ],
    }


def trace_from_dict(data: dict) -> SimulationTrace:
    steps = []
    for s in data["steps"]:
        steps.append(
            SimulationStep(
                index=s["index"],
                prior=tuple(s["prior"]),
                batch=batch_from_dict(s["batch"]),
                classifications=tuple(FlowCategory(c) for c in s["classifications"]),
                matched=tuple(s.get("matched", ())),
                chosen=s["chosen"],
                chosen_source=s["chosen_source"],
                filter_decisions=None,  # decisions are reloaded for reports only as raw dicts
                filter_usage=usage_from_dict(s["filter_usage"]) if s.get("filter_usage") else None,
                sut_failure=s.get("sut_failure", False),
            )
        )
    return SimulationTrace(
        commit_id=data["commit_id"],
        config=data["config"],
        steps=tuple(steps),
        totals=usage_from_dict(data["totals"]),
    )


def write_trace(trace: SimulationTrace, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(trace_to_dict(trace), indent=2, sort_keys=True) + "\n")


def load_trace(path: Path) -> SimulationTrace:
    return trace_from_dict(json.loads(Path(path).read_text()))


__all__ = [
    "SimConfig",
    "SimulationStep",
    "SimulationTrace",
    "TRACE_SCHEMA",
    "load_trace",
    "simulate",
    "trace_from_dict",
    "trace_to_dict",
    "write_trace",
]
