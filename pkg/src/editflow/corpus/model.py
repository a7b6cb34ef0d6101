"""Immutable change-unit types: edit hunks, commits, and the benchmark filter.

Content fields hold the raw replaced/replacing region text with one ``"\\n"``
per line (so a single blank line is ``"\\n"``, not ``""``). An empty string
means the region has no lines at all: ``content_pre == ""`` is a pure
insertion, ``content_post == ""`` a pure deletion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


def split_lines(content: str) -> list[str]:
    """Split region content into lines without terminators; "" -> []."""
    if content == "":
        return []
    return content.split("\n") if not content.endswith("\n") else content[:-1].split("\n")


def line_count(content: str) -> int:
    return len(split_lines(content))


@dataclass(frozen=True)
class EditHunk:
    """One atomic contiguous change: a pre-change line range replaced by new text.

    ``line_start``/``line_end`` are 1-based positions in the pre-change file.
    A pure insertion is encoded as ``line_start == line_end + 1``: the new
    lines go in front of pre-change line ``line_start``.
    """

    id: str
    file: str
    line_start: int
    line_end: int
    content_pre: str
    content_post: str
    structural_path: str = ""
    # Set when the enclosing diff removed the whole file, so replaying the
    # hunk must unlink rather than leave an empty file behind.
    deletes_file: bool = False

    def __post_init__(self) -> None:
        if self.line_start < 1:
            raise ValueError(f"{self.id}: line_start must be >= 1")
        if self.line_start > self.line_end + 1:
            raise ValueError(f"{self.id}: line_start > line_end + 1")
        if self.content_pre == "" and self.content_post == "":
            raise ValueError(f"{self.id}: content_pre and content_post both empty")
        if self.is_insertion and self.content_pre != "":
            raise ValueError(f"{self.id}: insertion range with nonempty content_pre")
        if not self.is_insertion and line_count(self.content_pre) != self.pre_line_span:
            raise ValueError(
                f"{self.id}: content_pre has {line_count(self.content_pre)} lines, "
                f"range spans {self.pre_line_span}"
            )

    @property
    def is_insertion(self) -> bool:
        return self.line_start == self.line_end + 1

    @property
    def pre_line_span(self) -> int:
        return 0 if self.is_insertion else self.line_end - self.line_start + 1

    @property
    def post_line_count(self) -> int:
        return line_count(self.content_post)

    @property
    def delta(self) -> int:
        """Net line-count change once applied."""
        return self.post_line_count - self.pre_line_span


def invert_hunk(h: EditHunk) -> EditHunk:
    """Swap pre/post content, recomputing the range in post-change coordinates.

    Within the hunk's own frame the replaced region starts at the same line;
    its extent is the post content's line count (insertion point when empty).
    """
    post_n = h.post_line_count
    if post_n == 0:
        start, end = h.line_start, h.line_start - 1
    else:
        start, end = h.line_start, h.line_start + post_n - 1
    return replace(
        h,
        line_start=start,
        line_end=end,
        content_pre=h.content_post,
        content_post=h.content_pre,
        deletes_file=False,
    )


@dataclass(frozen=True)
class Commit:
    """A single-parent commit decomposed into zero-context edit hunks."""

    commit_id: str
    parent_id: str
    message: str
    hunks: tuple[EditHunk, ...]
    repo: str
    renamed_files: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for h in self.hunks:
            if h.id in seen:
                raise ValueError(f"duplicate hunk id {h.id} in {self.commit_id}")
            seen.add(h.id)
        by_file: dict[str, list[EditHunk]] = {}
        for h in self.hunks:
            by_file.setdefault(h.file, []).append(h)
        for path, hs in by_file.items():
            hs = sorted(hs, key=lambda h: (h.line_start, h.line_end))
            for a, b in zip(hs, hs[1:]):
                if b.line_start <= a.line_end:
                    raise ValueError(
                        f"hunks {a.id} and {b.id} overlap in {path} "
                        f"([{a.line_start},{a.line_end}] vs [{b.line_start},{b.line_end}])"
                    )

    def hunk(self, hunk_id: str) -> EditHunk:
        for h in self.hunks:
            if h.id == hunk_id:
                return h
        raise KeyError(hunk_id)

    def hunk_ids(self) -> tuple[str, ...]:
        return tuple(h.id for h in self.hunks)

    def files(self) -> tuple[str, ...]:
        return tuple(sorted({h.file for h in self.hunks}))


def commit_summary(commit: Commit) -> dict:
    """Headline facts about a commit, including its editing-sequence space."""
    n = len(commit.hunks)
    return {
        "commit_id": commit.commit_id,
        "repo": commit.repo,
        "hunks": n,
        "files": len(commit.files()),
        "sequence_space_size": math.factorial(n),
    }


@dataclass(frozen=True)
class CommitFilter:
    """Benchmark admission criteria for extracted commits."""

    min_hunks: int = 5
    max_hunks: int = 10
    min_files: int = 2
    require_ascii: bool = True
    reject_merges: bool = True
    reject_renames: bool = True

    def __post_init__(self) -> None:
        if min(self.min_hunks, self.max_hunks, self.min_files) < 0:
            raise ValueError("counts must be >= 0")
        if self.min_hunks > self.max_hunks:
            raise ValueError("min_hunks > max_hunks")


def passes_filter(commit: Commit, f: CommitFilter) -> bool:
    """True iff the commit meets every admission criterion. Total function."""
    n = len(commit.hunks)
    if not (f.min_hunks <= n <= f.max_hunks):
        return False
    if len(commit.files()) < f.min_files:
        return False
    if f.reject_renames and commit.renamed_files:
        return False
    if f.require_ascii:
        for h in commit.hunks:
            if not (h.content_pre.isascii() and h.content_post.isascii()):
                return False
    # Merge commits cannot be represented (single parent_id), but honor the
    # flag for caches produced by other tools.
    return True


__all__ = [
    "Commit",
    "CommitFilter",
    "EditHunk",
    "commit_summary",
    "invert_hunk",
    "line_count",
    "passes_filter",
    "split_lines",
]
