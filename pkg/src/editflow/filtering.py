"""Flow-aware post-processing of SUT recommendations.

Each candidate is judged by its inferred order relation to the developer's
most recent edit only (1-context sensitivity): labels "precedes"/"either"
keep it, ranked by the mean log probability of the label tokens; labels
"follows"/"unrelated" defer it into a recycling pool that is re-examined on
every later step, since a deferred edit can become flow-aligned once the
editing context moves on. The known cost of the 1-context rule: a candidate
whose flow link points at an older prior edit is rejected even when correct.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from editflow.corpus.model import EditHunk
from editflow.errors import GatewayError
from editflow.flow.classify import PredictedEdit, normalize_region, predicted_as_hunk
from editflow.flow.graph import OrderLabel
from editflow.gateway.core import Gateway
from editflow.gateway.types import UsageRecord
from editflow.recovery.infer import infer_order
from editflow.recovery.prompts import PromptCandidate
from editflow.twin.protocol import RecommendationBatch, edit_to_dict

KEEP_LABELS = (OrderLabel.PRECEDES, OrderLabel.EITHER)


def candidate_key(p: PredictedEdit) -> tuple[str, str]:
    return (p.file, normalize_region(p.content_post))


@dataclass
class PoolEntry:
    prediction: PredictedEdit
    deferred_at: int
    last_label: OrderLabel | None


@dataclass
class RecyclePool:
    """Deferred candidates, deduplicated by normalized (file, post content)."""

    entries: dict[tuple[str, str], PoolEntry] = field(default_factory=dict)

    def defer(self, p: PredictedEdit, step_index: int, label: OrderLabel | None) -> None:
        key = candidate_key(p)
        existing = self.entries.get(key)
        if existing is None:
            self.entries[key] = PoolEntry(prediction=p, deferred_at=step_index, last_label=label)
        else:
            existing.last_label = label

    def remove(self, p: PredictedEdit) -> None:
        self.entries.pop(candidate_key(p), None)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class FilterDecision:
    prediction: PredictedEdit
    verdict: str  # "kept" | "deferred" | "passthrough"
    evaluated_against: str
    label: OrderLabel | None = None
    score: float | None = None
    from_pool: bool = False

    def to_dict(self) -> dict:
        return {
            "prediction": edit_to_dict(self.prediction),
            "verdict": self.verdict,
            "evaluated_against": self.evaluated_against,
            "label": self.label.value if self.label else None,
            "score": self.score,
            "from_pool": self.from_pool,
        }


@dataclass(frozen=True)
class FilterOutcome:
    kept: tuple[PredictedEdit, ...]
    pool: RecyclePool
    decisions: tuple[FilterDecision, ...]
    usage: UsageRecord


def _candidates(
    batch: RecommendationBatch, pool: RecyclePool
) -> list[tuple[PredictedEdit, bool]]:
    out: list[tuple[PredictedEdit, bool]] = []
    seen: set[tuple[str, str]] = set()
    for p in batch.edits:
        key = candidate_key(p)
        if key in seen:
            continue
        seen.add(key)
        out.append((p, False))
    for key, entry in sorted(pool.entries.items(), key=lambda kv: (kv[1].deferred_at, kv[0])):
        if key in seen:
            continue
        seen.add(key)
        out.append((entry.prediction, True))
    return out


def filter_and_rank(
    last_edit: EditHunk,
    batch: RecommendationBatch,
    pool: RecyclePool,
    prompt: PromptCandidate,
    gw: Gateway,
    *,
    step_index: int = 0,
    fail_open: bool = True,
    temperature: float = 0.7,
    max_output_tokens: int = 4096,
) -> FilterOutcome:
    """Evaluate batch+pool candidates against the last edit; keep, rank, defer.

    Exactly one inference call is made per candidate. Kept candidates sort by
    score descending, ties by SUT rank ascending with pool entries last. On a
    gateway failure the candidate passes through unscored at the tail
    (fail-open) or is deferred (fail-closed).
    """
    mark = gw.ledger_mark()
    kept: list[tuple[float, int, bool, PredictedEdit, FilterDecision]] = []
    passthrough: list[FilterDecision] = []
    decisions: list[FilterDecision] = []

    for p, from_pool in _candidates(batch, pool):
        try:
            result = infer_order(
                prompt,
                last_edit,
                predicted_as_hunk(p, hunk_id="candidate"),
                gw,
                temperature=temperature,
                max_output_tokens=max_output_tokens,
            )
        except GatewayError:
            decision = FilterDecision(
                prediction=p,
                verdict="passthrough" if fail_open else "deferred",
                evaluated_against=last_edit.id,
                from_pool=from_pool,
            )
            decisions.append(decision)
            if fail_open:
                passthrough.append(decision)
            else:
                pool.defer(p, step_index, None)
            continue

        if result.label in KEEP_LABELS:
            decision = FilterDecision(
                prediction=p,
                verdict="kept",
                evaluated_against=last_edit.id,
                label=result.label,
                score=result.score,
                from_pool=from_pool,
            )
            decisions.append(decision)
            kept.append((result.score, p.source_rank, from_pool, p, decision))
            if from_pool:
                pool.remove(p)
        else:
            decision = FilterDecision(
                prediction=p,
                verdict="deferred",
                evaluated_against=last_edit.id,
                label=result.label,
                from_pool=from_pool,
            )
            decisions.append(decision)
            pool.defer(p, step_index if not from_pool else pool.entries[candidate_key(p)].deferred_at, result.label)

    kept.sort(key=lambda item: (-item[0], item[1], item[2]))
    ordered = [p for _, _, _, p, _ in kept] + [d.prediction for d in passthrough]
    return FilterOutcome(
        kept=tuple(ordered),
        pool=pool,
        decisions=tuple(decisions),
        usage=gw.usage_since(mark),
    )


def recycle_scan(
    pool: RecyclePool,
    new_last_edit: EditHunk,
    prompt: PromptCandidate,
    gw: Gateway,
    *,
    temperature: float = 0.7,
    max_output_tokens: int = 4096,
) -> FilterOutcome:
    """Re-test every pool entry against the new last edit; release the aligned."""
    return filter_and_rank(
        new_last_edit,
        RecommendationBatch(),
        pool,
        prompt,
        gw,
        temperature=temperature,
        max_output_tokens=max_output_tokens,
    )


@dataclass
class FlowFilter:
    """Bundles the pieces a simulation loop needs to post-process each batch."""

    prompt: PromptCandidate
    gateway: Gateway
    pool: RecyclePool = field(default_factory=RecyclePool)
    fail_open: bool = True
    temperature: float = 0.7
    max_output_tokens: int = 4096
    # Reserved: only a window of 1 (the most recent edit) is implemented.
    context_window: int = 1

    def __post_init__(self) -> None:
        if self.context_window != 1:
            raise NotImplementedError("only context_window=1 is supported")

    def apply(
        self, last_edit: EditHunk, batch: RecommendationBatch, step_index: int
    ) -> FilterOutcome:
        return filter_and_rank(
            last_edit,
            batch,
            self.pool,
            self.prompt,
            self.gateway,
            step_index=step_index,
            fail_open=self.fail_open,
            temperature=self.temperature,
            max_output_tokens=self.max_output_tokens,
        )


__all__ = [
    "FilterDecision",
    "FilterOutcome",
    "FlowFilter",
    "KEEP_LABELS",
    "PoolEntry",
    "RecyclePool",
    "candidate_key",
    "filter_and_rank",
    "recycle_scan",
]
