"""Flow statistics, correctness aggregates, order-violation counts, reports.

Correctness follows the membership view: a prediction counts as correct when
it realizes some ground-truth hunk, applied or not, so flow-keeping and
flow-jumping predictions both count for precision while reverts and
hallucinated edits count against. Recall is the fraction of a commit's hunks
that were ever recommended during its session. F0.5 weighs precision twice
as heavily as recall.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from editflow.corpus.model import Commit
from editflow.errors import NoPredictionsError, SequenceMismatchError
from editflow.flow.classify import FlowCategory
from editflow.flow.graph import FlowGraph, successors
from editflow.gateway.types import UsageRecord, aggregate_usage
from editflow.twin.simulate import SimulationTrace


@dataclass(frozen=True)
class FlowStats:
    keep_pct: float
    jump_pct: float
    revert_pct: float
    break_pct: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.keep_pct, self.jump_pct, self.revert_pct, self.break_pct)


@dataclass(frozen=True)
class CorrectnessStats:
    precision: float
    recall: float
    f_half: float


def f_half_score(precision: float, recall: float) -> float:
    """F0.5 = 1.25 * P * R / (0.25 * P + R); zero when both inputs vanish."""
    if precision + recall == 0:
        return 0.0
    return (1.25 * precision * recall) / (0.25 * precision + recall)


def flow_stats(traces: list[SimulationTrace]) -> FlowStats:
    """Pool every per-prediction classification across all traces."""
    if not traces:
        raise NoPredictionsError("no traces")
    counts = {c: 0 for c in FlowCategory}
    for trace in traces:
        for step in trace.steps:
            for category in step.classifications:
                counts[category] += 1
    total = sum(counts.values())
    if total == 0:
        raise NoPredictionsError("traces contain no classified predictions")
    pct = {c: 100.0 * counts[c] / total for c in FlowCategory}
    return FlowStats(
        keep_pct=pct[FlowCategory.KEEP],
        jump_pct=pct[FlowCategory.JUMP],
        revert_pct=pct[FlowCategory.REVERT],
        break_pct=pct[FlowCategory.BREAK],
    )


def correctness_stats(
    traces: list[SimulationTrace], commits: dict[str, Commit]
) -> CorrectnessStats:
    """Macro-averaged per-request precision and per-commit recall, plus F0.5.

    Requests with empty batches carry no precision sample. Micro variants are
    available from :func:`correctness_breakdown`.
    """
    macro = correctness_breakdown(traces, commits)
    return CorrectnessStats(
        precision=macro["precision_macro"],
        recall=macro["recall_macro"],
        f_half=f_half_score(macro["precision_macro"], macro["recall_macro"]),
    )


def correctness_breakdown(
    traces: list[SimulationTrace], commits: dict[str, Commit]
) -> dict:
    """Both macro and micro aggregation of the membership metrics."""
    per_request: list[float] = []
    micro_correct = 0
    micro_total = 0
    per_commit_recall: list[float] = []
    for trace in traces:
        commit = commits.get(trace.commit_id)
        if commit is None:
            raise KeyError(f"no commit for trace {trace.commit_id}")
        recommended: set[str] = set()
        for step in trace.steps:
            n = len(step.classifications)
            if n == 0:
                continue
            good = sum(
                1
                for category in step.classifications
                if category in (FlowCategory.KEEP, FlowCategory.JUMP)
            )
            per_request.append(good / n)
            micro_correct += good
            micro_total += n
            for category, hunk_id in zip(step.classifications, step.matched):
                if category in (FlowCategory.KEEP, FlowCategory.JUMP) and hunk_id:
                    recommended.add(hunk_id)
        per_commit_recall.append(len(recommended & set(commit.hunk_ids())) / len(commit.hunks))
    precision_macro = sum(per_request) / len(per_request) if per_request else 0.0
    recall_macro = (
        sum(per_commit_recall) / len(per_commit_recall) if per_commit_recall else 0.0
    )
    return {
        "precision_macro": precision_macro,
        "recall_macro": recall_macro,
        "precision_micro": micro_correct / micro_total if micro_total else 0.0,
        "requests": len(per_request),
        "commits": len(per_commit_recall),
    }


# --- order violations ---------------------------------------------------------

class ViolationMode(Enum):
    STRICT_REVERSE = "strict_reverse"
    WALK_VALIDITY = "walk_validity"


@dataclass(frozen=True)
class ObservedSequence:
    commit_id: str
    order: tuple[str, ...]


@dataclass(frozen=True)
class ViolationReport:
    mode: ViolationMode
    count: int
    witnesses: tuple[tuple[int, tuple[str, str]], ...]


def count_violations(
    g: FlowGraph, s: ObservedSequence, mode: ViolationMode = ViolationMode.STRICT_REVERSE
) -> ViolationReport:
    """Count transitions of the observed sequence the graph forbids.

    STRICT_REVERSE flags an adjacent transition only when the graph contains
    the reverse edge and not the forward one: a definitive contradiction.
    WALK_VALIDITY flags every step that is not a one-hop successor of the
    prefix, which also penalizes jumps across unlabeled gaps.
    """
    if sorted(s.order) != sorted(g.nodes):
        raise SequenceMismatchError(
            f"sequence over {len(s.order)} ids vs graph over {len(g.nodes)} nodes"
        )
    witnesses: list[tuple[int, tuple[str, str]]] = []
    for t in range(len(s.order) - 1):
        a, b = s.order[t], s.order[t + 1]
        if mode is ViolationMode.STRICT_REVERSE:
            if (b, a) in g.edges and (a, b) not in g.edges:
                witnesses.append((t, (a, b)))
        else:
            prefix = set(s.order[: t + 1])
            if b not in successors(g, prefix):
                witnesses.append((t, (a, b)))
    return ViolationReport(mode=mode, count=len(witnesses), witnesses=tuple(witnesses))


# --- report rendering -----------------------------------------------------------

@dataclass(frozen=True)
class ReportCell:
    """One (SUT, configuration) row of the report."""

    sut_id: str
    config_name: str
    traces: tuple[SimulationTrace, ...] = field(repr=False, default=())


def _queries(traces: tuple[SimulationTrace, ...]) -> int:
    return sum(max(len(t.steps) - 1, 0) for t in traces)


def render_report(
    cells: list[ReportCell],
    commits: dict[str, Commit],
    *,
    thresholds: dict | None = None,
) -> dict:
    """Machine-readable report plus a fixed-width table, one row per cell.

    Returns {"json": ..., "text": ..., "ok": bool}; ``ok`` reflects the
    optional acceptance thresholds (min_precision, max_break_pct).
    """
    rows = []
    ok = True
    for cell in cells:
        if cell.traces:
            try:
                fs = flow_stats(list(cell.traces))
                flow = {
                    "keep": fs.keep_pct,
                    "jump": fs.jump_pct,
                    "revert": fs.revert_pct,
                    "break": fs.break_pct,
                }
            except NoPredictionsError:
                fs = None
                flow = None
            cs = correctness_stats(list(cell.traces), commits)
            breakdown = correctness_breakdown(list(cell.traces), commits)
            totals = aggregate_usage([t.totals for t in cell.traces])
            n_queries = _queries(cell.traces)
            per_query = {
                "latency": totals.latency / n_queries if n_queries else 0.0,
                "tokens": (totals.input_tokens + totals.output_tokens) / n_queries
                if n_queries
                else 0.0,
                "cost": totals.cost / n_queries if n_queries else 0.0,
            }
            correctness = {
                "precision": cs.precision,
                "recall": cs.recall,
                "f_half": cs.f_half,
                **breakdown,
            }
            if thresholds:
                if "min_precision" in thresholds and cs.precision < thresholds["min_precision"]:
                    ok = False
                if (
                    flow is not None
                    and "max_break_pct" in thresholds
                    and flow["break"] > thresholds["max_break_pct"]
                ):
                    ok = False
        else:
            flow = None
            correctness = None
            per_query = None
            totals = UsageRecord()
        rows.append(
            {
                "sut": cell.sut_id,
                "config": cell.config_name,
                "traces": len(cell.traces),
                "flow_pct": flow,
                "correctness": correctness,
                "usage_totals": {
                    "input_tokens": totals.input_tokens,
                    "output_tokens": totals.output_tokens,
                    "latency": totals.latency,
                    "cost": totals.cost,
                    "estimated": totals.estimated,
                },
                "usage_per_query": per_query,
            }
        )

    header = (
        f"{'SUT':<12} {'Config':<12} {'Keep%':>7} {'Jump%':>7} {'Revert%':>8} "
        f"{'Break%':>7} {'Prec%':>7} {'Rec%':>7} {'F0.5%':>7} "
        f"{'Lat(s)':>8} {'Tokens':>9} {'Cost($)':>9}"
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        if row["flow_pct"] is None or row["correctness"] is None:
            lines.append(f"{row['sut']:<12} {row['config']:<12} {'no data':>7}")
            continue
        f = row["flow_pct"]
        c = row["correctness"]
        u = row["usage_per_query"]
        lines.append(
            f"{row['sut']:<12} {row['config']:<12} "
            f"{f['keep']:>7.2f} {f['jump']:>7.2f} {f['revert']:>8.2f} {f['break']:>7.2f} "
            f"{100 * c['precision']:>7.2f} {100 * c['recall']:>7.2f} {100 * c['f_half']:>7.2f} "
            f"{u['latency']:>8.2f} {u['tokens']:>9.1f} {u['cost']:>9.4f}"
        )
    return {"json": {"rows": rows, "ok": ok}, "text": "\n".join(lines), "ok": ok}


def write_report(report: dict, path) -> None:
    from pathlib import Path

    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(report["json"], indent=2, sort_keys=True) + "\n")


__all__ = [
    "CorrectnessStats",
    "FlowStats",
    "ObservedSequence",
    "ReportCell",
    "ViolationMode",
    "ViolationReport",
    "correctness_breakdown",
    "correctness_stats",
    "count_violations",
    "f_half_score",
    "flow_stats",
    "render_report",
    "write_report",
]
