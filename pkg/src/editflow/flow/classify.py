"""Match SUT predictions to ground-truth hunks and classify their flow impact.

A prediction matches a hunk when it targets the same file, its line range
(given in the current workspace frame) overlaps the hunk's offset-corrected
range, and the proposed content equals the hunk's post content after
whitespace normalization. A prediction that instead proposes the *pre*
content of an already-applied hunk at its location is a revert proposal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from editflow.corpus.model import Commit, EditHunk
from editflow.corpus.workspace import Workspace
from editflow.errors import AmbiguousMatchError
from editflow.flow.graph import FlowGraph, successors


class FlowCategory(Enum):
    KEEP = "keep"
    JUMP = "jump"
    REVERT = "revert"
    BREAK = "break"


@dataclass(frozen=True)
class PredictedEdit:
    """A candidate edit returned by a SUT, in current-workspace coordinates."""

    file: str
    line_start: int
    line_end: int
    content_pre: str
    content_post: str
    source_rank: int = 0

    def __post_init__(self) -> None:
        if self.line_start < 1 or self.line_start > self.line_end + 1:
            raise ValueError("invalid line range")
        if self.content_pre == "" and self.content_post == "":
            raise ValueError("content_pre and content_post both empty")


@dataclass(frozen=True)
class MatchResult:
    hunk_id: str
    is_revert: bool


def normalize_region(text: str) -> str:
    """Whitespace-insensitive content key: strip each line, drop blank lines."""
    lines = [ln.strip() for ln in text.split("\n")]
    return "\n".join(ln for ln in lines if ln)


def token_similarity(a: str, b: str) -> float:
    """Jaccard overlap of identifier-level tokens, for the lenient match mode."""
    ta = set(re.findall(r"\w+", a))
    tb = set(re.findall(r"\w+", b))
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def _ranges_touch(a_start: int, a_end: int, b_start: int, b_end: int) -> bool:
    # Insertion points are empty ranges (end = start - 1); widen them to a
    # single line so an insertion can meet the region it abuts.
    a_end = max(a_end, a_start)
    b_end = max(b_end, b_start)
    return a_start <= b_end and b_start <= a_end


def match_edit(
    p: PredictedEdit,
    commit: Commit,
    ws: Workspace,
    *,
    similarity_threshold: float | None = None,
) -> MatchResult | None:
    """Identify the ground-truth hunk a prediction realizes, if any.

    Matching is exact normalized-content equality so that the no-match
    verdict stays definitive; ``similarity_threshold`` switches content
    comparison to token-overlap at or above the given ratio for lenient
    studies. Content matches take priority over revert proposals; two content
    matches cannot coexist for disjoint hunks and raise
    :class:`AmbiguousMatchError`.
    """

    def content_eq(a: str, b: str) -> bool:
        if a == b:
            return True
        if similarity_threshold is not None and a and b:
            return token_similarity(a, b) >= similarity_threshold
        return False

    p_norm = normalize_region(p.content_post)
    matches: list[MatchResult] = []
    reverts: list[MatchResult] = []
    for h in commit.hunks:
        if h.file != p.file:
            continue
        h_start, h_end = ws.current_range(h)
        if not _ranges_touch(p.line_start, p.line_end, h_start, h_end):
            continue
        if p_norm != "" and content_eq(p_norm, normalize_region(h.content_post)):
            matches.append(MatchResult(h.id, is_revert=False))
        elif (
            h.id in ws.applied
            and content_eq(p_norm, normalize_region(h.content_pre))
        ):
            reverts.append(MatchResult(h.id, is_revert=True))
        elif p_norm == "" and h.content_post == "" and h.pre_line_span > 0:
            # Pure deletions: both sides empty after normalization is only
            # meaningful when the prediction also removes the hunk's region.
            if content_eq(normalize_region(p.content_pre), normalize_region(h.content_pre)):
                matches.append(MatchResult(h.id, is_revert=False))
    if len(matches) > 1:
        raise AmbiguousMatchError(f"{[m.hunk_id for m in matches]} all match prediction")
    if matches:
        return matches[0]
    if len(reverts) > 1:
        raise AmbiguousMatchError(f"{[m.hunk_id for m in reverts]} all revert-match")
    return reverts[0] if reverts else None


def category_predicates(
    p: PredictedEdit,
    prior: set[str],
    g: FlowGraph,
    commit: Commit,
    ws: Workspace,
) -> dict[FlowCategory, bool]:
    """Evaluate all four category predicates independently.

    Exactly one is true for any prediction; callers that only need the
    category should use :func:`classify`.
    """
    m = match_edit(p, commit, ws)
    succ = successors(g, prior)
    in_truth = m is not None and not m.is_revert
    matched_id = m.hunk_id if m else None
    return {
        FlowCategory.KEEP: in_truth and matched_id not in prior and matched_id in succ,
        FlowCategory.JUMP: in_truth and matched_id not in prior and matched_id not in succ,
        FlowCategory.REVERT: (in_truth and matched_id in prior) or (m is not None and m.is_revert),
        FlowCategory.BREAK: m is None,
    }


def classify(
    p: PredictedEdit,
    prior: set[str],
    g: FlowGraph,
    commit: Commit,
    ws: Workspace,
) -> FlowCategory:
    """The unique flow category of a prediction at the given editing state."""
    preds = category_predicates(p, prior, g, commit, ws)
    for category in (FlowCategory.REVERT, FlowCategory.KEEP, FlowCategory.JUMP, FlowCategory.BREAK):
        if preds[category]:
            return category
    raise AssertionError("no category predicate held")  # unreachable by the partition property


def predicted_as_hunk(p: PredictedEdit, hunk_id: str = "predicted") -> EditHunk:
    """Coerce a prediction to a hunk value for serialization and inference.

    SUT output cannot be trusted to keep its line range consistent with its
    cited pre content, so the range is renormalized to the content (anchored
    at ``line_start``). The structural path is unknown and left empty.
    """
    from editflow.corpus.model import line_count

    pre_lines = line_count(p.content_pre)
    return EditHunk(
        id=hunk_id,
        file=p.file,
        line_start=p.line_start,
        line_end=p.line_start + pre_lines - 1,
        content_pre=p.content_pre,
        content_post=p.content_post,
        structural_path="",
    )


__all__ = [
    "FlowCategory",
    "MatchResult",
    "PredictedEdit",
    "category_predicates",
    "classify",
    "match_edit",
    "normalize_region",
    "predicted_as_hunk",
]
