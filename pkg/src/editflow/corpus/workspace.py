"""Mutable checkout of a commit's pre-change tree with line-offset tracking.

Files are treated as ``"\\n"``-terminated line sequences; ``"\\r"`` stays part
of the line content so CRLF sources survive byte-for-byte. Pre-content checks
compare lines with trailing whitespace stripped, tolerating editor noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from editflow.corpus.model import EditHunk, split_lines
from editflow.errors import AlreadyAppliedError, PatchMismatchError


def _split_keepends(text: str) -> list[str]:
    parts = text.split("\n")
    lines = [p + "\n" for p in parts[:-1]]
    if parts[-1]:
        lines.append(parts[-1])
    return lines


@dataclass(frozen=True)
class _OffsetRecord:
    line_start: int
    line_end: int
    delta: int
    hunk_id: str = ""


@dataclass
class Workspace:
    """A materialized file tree plus the offset table of applied hunks."""

    root: Path
    offsets: dict[str, list[_OffsetRecord]] = field(default_factory=dict)
    applied: list[str] = field(default_factory=list)

    def path(self, file: str) -> Path:
        return self.root / file

    def read_lines(self, file: str) -> list[str]:
        p = self.path(file)
        if not p.exists():
            return []
        return _split_keepends(p.read_bytes().decode("utf-8"))

    def remap(self, file: str, pre_line: int, *, exclude_hunk: str | None = None) -> int:
        """Map a pre-change line number to its current position.

        Exact for unedited lines and for region starts of hunks with
        pairwise-disjoint pre-change ranges: only hunks strictly above
        (``line_end < pre_line``) contribute their delta. ``exclude_hunk``
        skips one record, so an applied insertion's own delta does not push
        its region start past itself.
        """
        shift = 0
        for rec in self.offsets.get(file, ()):
            if rec.line_end < pre_line and rec.hunk_id != exclude_hunk:
                shift += rec.delta
        return pre_line + shift

    def current_range(self, h: EditHunk) -> tuple[int, int]:
        """Current-frame line range occupied by ``h`` (empty: end = start - 1).

        Applied hunks occupy their post content; unapplied ones their
        pre-change region (an insertion point when the region is empty).
        """
        applied = h.id in self.applied
        start = self.remap(h.file, h.line_start, exclude_hunk=h.id if applied else None)
        span = h.post_line_count if applied else h.pre_line_span
        return start, start + span - 1


def materialize_tree(files: dict[str, str], dest: Path) -> Workspace:
    """Write a plain ``path -> text`` mapping under ``dest`` as a workspace."""
    dest.mkdir(parents=True, exist_ok=True)
    for rel, text in files.items():
        p = dest / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(text.encode("utf-8"))
    return Workspace(root=dest)


def _norm(line: str) -> str:
    return line.rstrip()


def apply_hunk(ws: Workspace, h: EditHunk) -> Workspace:
    """Apply ``h`` at its offset-corrected location, mutating ``ws`` in place."""
    if h.id in ws.applied:
        raise AlreadyAppliedError(h.id)

    lines = ws.read_lines(h.file)
    cur_start = ws.remap(h.file, h.line_start)
    expected = split_lines(h.content_pre)
    if cur_start > len(lines) + 1:
        raise PatchMismatchError(
            f"{h.id}: start line {cur_start} beyond end of {h.file} ({len(lines)} lines)"
        )
    actual = lines[cur_start - 1 : cur_start - 1 + len(expected)]
    if len(actual) != len(expected) or any(
        _norm(a) != _norm(e) for a, e in zip(actual, expected)
    ):
        raise PatchMismatchError(
            f"{h.id}: pre-change content mismatch at {h.file}:{cur_start}"
        )

    new_text = (
        "".join(lines[: cur_start - 1])
        + h.content_post
        + "".join(lines[cur_start - 1 + len(expected) :])
    )
    target = ws.path(h.file)
    if new_text == "" and h.deletes_file:
        target.unlink(missing_ok=True)
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(new_text.encode("utf-8"))

    ws.offsets.setdefault(h.file, []).append(
        _OffsetRecord(h.line_start, h.line_end, h.delta, h.id)
    )
    ws.offsets[h.file].sort(key=lambda r: (r.line_start, r.line_end))
    ws.applied.append(h.id)
    return ws


__all__ = ["Workspace", "apply_hunk", "materialize_tree"]
