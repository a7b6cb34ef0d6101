"""Git-backed commit ingestion: zero-context hunk extraction and checkouts.

The repository locator is a local clone path; all access goes through the
``git`` executable so extraction semantics match the tool developers use.
"""

from __future__ import annotations

import io
import json
import re
import subprocess
import tarfile
from pathlib import Path

from editflow.corpus.model import Commit, EditHunk
from editflow.corpus.workspace import Workspace
from editflow.errors import (
    CheckoutFailedError,
    EmptyCommitError,
    MergeCommitError,
    MissingParentError,
)

_HUNK_HEADER = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
_DEF_LINE = re.compile(r"^\s*(?:async\s+)?(?:def|class)\s")
_NO_EOL = "\\ No newline at end of file"


def _git(repo: str | Path, *args: str) -> str:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        check=False,
    )
    if proc.returncode != 0:
        raise CheckoutFailedError(
            f"git {' '.join(args)} failed: {proc.stderr.decode('utf-8', 'replace').strip()}"
        )
    return proc.stdout.decode("utf-8", "replace")


def list_commits(repo: str | Path, rev_range: str = "HEAD", limit: int | None = None) -> list[str]:
    args = ["rev-list", rev_range]
    if limit is not None:
        args += ["-n", str(limit)]
    out = _git(repo, *args)
    return out.split()


def _parents_of(repo: str | Path, commit_id: str) -> list[str]:
    out = _git(repo, "rev-list", "--parents", "-n", "1", commit_id).split()
    return out[1:]


def _renamed_files(repo: str | Path, parent: str, commit_id: str) -> tuple[str, ...]:
    out = _git(repo, "diff", "--name-status", "-M50%", parent, commit_id)
    renamed = []
    for line in out.splitlines():
        if line.startswith("R"):
            parts = line.split("\t")
            if len(parts) >= 3:
                renamed.append(parts[2])
    return tuple(renamed)


def _blob_lines(repo: str | Path, rev: str, file: str) -> list[str]:
    try:
        text = _git(repo, "show", f"{rev}:{file}")
    except CheckoutFailedError:
        return []
    return text.split("\n")


def structural_path_for(pre_lines: list[str], at_line: int) -> str:
    """Best-effort chain of enclosing def/class lines for Python sources.

    Scans upward from ``at_line`` collecting definition headers at strictly
    decreasing indentation; returns them top-down with original indentation.
    """
    i = min(at_line, len(pre_lines)) - 1
    if i < 0:
        return ""
    chain: list[str] = []
    cur_indent: int | None = None
    for j in range(i, -1, -1):
        raw = pre_lines[j]
        stripped = raw.strip()
        if not stripped:
            continue
        indent = len(raw) - len(raw.lstrip())
        if cur_indent is None:
            cur_indent = indent
            if _DEF_LINE.match(raw):
                chain.append(raw.rstrip())
            continue
        if indent < cur_indent and _DEF_LINE.match(raw):
            chain.append(raw.rstrip())
            cur_indent = indent
            if indent == 0:
                break
    return "\n".join(reversed(chain))


def _join_region(lines: list[str], missing_final_newline: bool) -> str:
    if not lines:
        return ""
    text = "\n".join(lines)
    return text if missing_final_newline else text + "\n"


def _parse_diff(diff_text: str) -> list[dict]:
    """Parse ``git diff -U0`` output into per-hunk dicts, skipping binaries."""
    hunks: list[dict] = []
    file_pre: str | None = None
    file_post: str | None = None
    current: dict | None = None

    def flush() -> None:
        nonlocal current
        if current is not None:
            hunks.append(current)
            current = None

    for line in diff_text.split("\n"):
        if line.startswith("diff --git "):
            flush()
            file_pre = file_post = None
        elif line.startswith("Binary files ") or line.startswith("GIT binary patch"):
            flush()
            file_pre = file_post = None
        elif line.startswith("--- "):
            path = line[4:]
            file_pre = None if path == "/dev/null" else path.split("/", 1)[1]
        elif line.startswith("+++ "):
            path = line[4:]
            file_post = None if path == "/dev/null" else path.split("/", 1)[1]
        elif line.startswith("@@ "):
            flush()
            m = _HUNK_HEADER.match(line)
            if m is None:
                continue
            a = int(m.group(1))
            n = int(m.group(2)) if m.group(2) is not None else 1
            if n == 0:
                line_start, line_end = a + 1, a
            else:
                line_start, line_end = a, a + n - 1
            current = {
                "file": file_post or file_pre,
                "line_start": line_start,
                "line_end": line_end,
                "pre": [],
                "post": [],
                "pre_no_eol": False,
                "post_no_eol": False,
                "deletes_file": file_post is None,
            }
        elif current is not None:
            if line.startswith("-"):
                current["pre"].append(line[1:])
                current["last"] = "pre"
            elif line.startswith("+"):
                current["post"].append(line[1:])
                current["last"] = "post"
            elif line.startswith("\\") and line.strip() == _NO_EOL.strip():
                side = current.get("last")
                if side:
                    current[f"{side}_no_eol"] = True
    flush()
    return hunks


def extract_commit(repo: str | Path, commit_id: str) -> Commit:
    """Decompose ``commit_id`` into zero-context hunks against its sole parent."""
    parents = _parents_of(repo, commit_id)
    if len(parents) > 1:
        raise MergeCommitError(f"{commit_id} has {len(parents)} parents")
    if not parents:
        raise MissingParentError(f"{commit_id} is a root commit")
    parent = parents[0]

    full_id = _git(repo, "rev-parse", commit_id).strip()
    message = _git(repo, "log", "-1", "--format=%B", commit_id).rstrip("\n")
    diff_text = _git(
        repo, "diff", "-U0", "--no-color", "--no-renames", "--no-ext-diff",
        parent, commit_id,
    )
    raw = _parse_diff(diff_text)
    if not raw:
        raise EmptyCommitError(f"{commit_id}: no text hunks")

    pre_lines_cache: dict[str, list[str]] = {}
    hunks: list[EditHunk] = []
    for i, r in enumerate(raw, start=1):
        file = r["file"]
        structural = ""
        if file.endswith(".py") and not r["deletes_file"]:
            if file not in pre_lines_cache:
                pre_lines_cache[file] = _blob_lines(repo, parent, file)
            structural = structural_path_for(pre_lines_cache[file], r["line_start"])
        hunks.append(
            EditHunk(
                id=f"h{i}",
                file=file,
                line_start=r["line_start"],
                line_end=r["line_end"],
                content_pre=_join_region(r["pre"], r["pre_no_eol"]),
                content_post=_join_region(r["post"], r["post_no_eol"]),
                structural_path=structural,
                deletes_file=r["deletes_file"],
            )
        )

    return Commit(
        commit_id=full_id,
        parent_id=_git(repo, "rev-parse", parent).strip(),
        message=message,
        hunks=tuple(hunks),
        repo=str(repo),
        renamed_files=_renamed_files(repo, parent, commit_id),
    )


def checkout_tree(repo: str | Path, rev: str, dest: Path) -> Workspace:
    """Extract the full file tree of ``rev`` into ``dest``."""
    dest = Path(dest)
    if dest.exists() and any(dest.iterdir()):
        raise CheckoutFailedError(f"destination {dest} is not empty")
    dest.mkdir(parents=True, exist_ok=True)
    proc = subprocess.run(
        ["git", "-C", str(repo), "archive", "--format=tar", rev],
        capture_output=True,
        check=False,
    )
    if proc.returncode != 0:
        raise CheckoutFailedError(proc.stderr.decode("utf-8", "replace").strip())
    with tarfile.open(fileobj=io.BytesIO(proc.stdout)) as tf:
        tf.extractall(dest)
    return Workspace(root=dest)


def materialize_pre_state(commit: Commit, dest: Path) -> Workspace:
    """Check out the parent revision of ``commit`` into ``dest``."""
    return checkout_tree(commit.repo, commit.parent_id, dest)


# --- commit cache files -------------------------------------------------------

CACHE_SCHEMA = "editflow-commit/1"


def commit_to_dict(commit: Commit) -> dict:
    return {
        "schema": CACHE_SCHEMA,
        "commit_id": commit.commit_id,
        "parent_id": commit.parent_id,
        "repo": commit.repo,
        "message": commit.message,
        "renamed_files": list(commit.renamed_files),
        "hunks": [
            {
                "id": h.id,
                "file": h.file,
                "line_start": h.line_start,
                "line_end": h.line_end,
                "content_pre": h.content_pre,
                "content_post": h.content_post,
                "structural_path": h.structural_path,
                "deletes_file": h.deletes_file,
            }
            for h in commit.hunks
        ],
    }


def commit_from_dict(data: dict) -> Commit:
    return Commit(
        commit_id=data["commit_id"],
        parent_id=data["parent_id"],
        message=data["message"],
        repo=data["repo"],
        renamed_files=tuple(data.get("renamed_files", ())),
        hunks=tuple(
            EditHunk(
                id=h["id"],
                file=h["file"],
                line_start=h["line_start"],
                line_end=h["line_end"],
                content_pre=h["content_pre"],
                content_post=h["content_post"],
                structural_path=h.get("structural_path", ""),
                deletes_file=h.get("deletes_file", False),
            )
            for h in data["hunks"]
        ),
    )


def write_commit_cache(commit: Commit, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(commit_to_dict(commit), indent=2, sort_keys=True) + "\n")


def load_commit_cache(path: Path) -> Commit:
    return commit_from_dict(json.loads(Path(path).read_text()))


__all__ = [
    "CACHE_SCHEMA",
    "checkout_tree",
    "commit_from_dict",
    "commit_to_dict",
    "extract_commit",
    "list_commits",
    "load_commit_cache",
    "materialize_pre_state",
    "structural_path_for",
    "write_commit_cache",
]
