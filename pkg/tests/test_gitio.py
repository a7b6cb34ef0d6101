"""Extraction against a real repository, checked by the VCS tool itself."""

from __future__ import annotations

import re
import subprocess

import pytest

from editflow.corpus.gitio import (
    commit_from_dict,
    commit_to_dict,
    extract_commit,
    load_commit_cache,
    materialize_pre_state,
    structural_path_for,
    write_commit_cache,
)
from editflow.corpus.model import CommitFilter, passes_filter
from editflow.corpus.workspace import apply_hunk
from editflow.errors import EmptyCommitError, MergeCommitError, MissingParentError


def git_out(repo, *args) -> str:
    return subprocess.run(
        ["git", "-C", str(repo), *args], capture_output=True, check=True
    ).stdout.decode()


def test_root_commit_rejected(fixture_repo):
    with pytest.raises(MissingParentError):
        extract_commit(fixture_repo["repo"], fixture_repo["root"])


def test_merge_commit_rejected(fixture_repo):
    with pytest.raises(MergeCommitError):
        extract_commit(fixture_repo["repo"], fixture_repo["merge"])


def test_hunk_counts_match_vcs_hunk_headers(fixture_repo):
    """Oracle: count @@ headers in the diff tool's own zero-context output."""
    repo = fixture_repo["repo"]
    for sha in fixture_repo["edit_commits"][:20]:
        commit = extract_commit(repo, sha)
        raw = git_out(repo, "diff", "-U0", "--no-renames", f"{sha}^", sha)
        oracle = len(re.findall(r"^@@ ", raw, re.MULTILINE))
        assert len(commit.hunks) == oracle, sha


def test_eight_hunks_across_four_files(fixture_repo):
    commit = extract_commit(fixture_repo["repo"], fixture_repo["eight_hunks"])
    assert len(commit.hunks) == 8
    assert len(commit.files()) == 4


def test_round_trip_all_edit_commits(fixture_repo, tmp_path):
    """materialize + apply-all reproduces every committed tree byte-exactly."""
    repo = fixture_repo["repo"]
    for n, sha in enumerate(fixture_repo["edit_commits"]):
        commit = extract_commit(repo, sha)
        ws = materialize_pre_state(commit, tmp_path / f"ws{n}")
        for h in commit.hunks:
            apply_hunk(ws, h)
        for file in {h.file for h in commit.hunks}:
            expected_exists = (
                subprocess.run(
                    ["git", "-C", str(repo), "cat-file", "-e", f"{sha}:{file}"],
                    capture_output=True,
                ).returncode
                == 0
            )
            if not expected_exists:
                assert not ws.path(file).exists(), f"{sha}:{file} should be deleted"
                continue
            expected = subprocess.run(
                ["git", "-C", str(repo), "show", f"{sha}:{file}"],
                capture_output=True, check=True,
            ).stdout
            assert ws.path(file).read_bytes() == expected, f"{sha}:{file}"


def test_round_trip_in_reverse_order(fixture_repo, tmp_path):
    repo = fixture_repo["repo"]
    sha = fixture_repo["eight_hunks"]
    commit = extract_commit(repo, sha)
    ws = materialize_pre_state(commit, tmp_path / "ws")
    for h in reversed(commit.hunks):
        apply_hunk(ws, h)
    for file in {h.file for h in commit.hunks}:
        expected = subprocess.run(
            ["git", "-C", str(repo), "show", f"{sha}:{file}"],
            capture_output=True, check=True,
        ).stdout
        assert ws.path(file).read_bytes() == expected


def test_materialize_twice_identical(fixture_repo, tmp_path):
    repo = fixture_repo["repo"]
    commit = extract_commit(repo, fixture_repo["eight_hunks"])
    ws1 = materialize_pre_state(commit, tmp_path / "one")
    ws2 = materialize_pre_state(commit, tmp_path / "two")
    files1 = sorted(p.relative_to(ws1.root) for p in ws1.root.rglob("*") if p.is_file())
    files2 = sorted(p.relative_to(ws2.root) for p in ws2.root.rglob("*") if p.is_file())
    assert files1 == files2
    for rel in files1:
        assert (ws1.root / rel).read_bytes() == (ws2.root / rel).read_bytes()


def test_rename_detection(fixture_repo):
    commit = extract_commit(fixture_repo["repo"], fixture_repo["rename"])
    assert commit.renamed_files
    assert not passes_filter(commit, CommitFilter(min_hunks=0, max_hunks=99, min_files=0))


def test_unicode_commit_fails_ascii_filter(fixture_repo):
    commit = extract_commit(fixture_repo["repo"], fixture_repo["unicode"])
    assert not passes_filter(commit, CommitFilter(min_hunks=0, max_hunks=99, min_files=0))


def test_deleted_file_hunk_flagged(fixture_repo):
    commit = extract_commit(fixture_repo["repo"], fixture_repo["deleted_file"])
    flagged = [h for h in commit.hunks if h.deletes_file]
    assert len(flagged) == 1
    assert flagged[0].file == "newmod.py"
    assert flagged[0].content_post == ""


def test_commit_cache_round_trip(fixture_repo, tmp_path):
    commit = extract_commit(fixture_repo["repo"], fixture_repo["eight_hunks"])
    path = tmp_path / "cache.json"
    write_commit_cache(commit, path)
    assert load_commit_cache(path) == commit
    assert commit_from_dict(commit_to_dict(commit)) == commit


def test_structural_path_nested_defs():
    lines = [
        "class Outer:",
        "    def method(self, x):",
        "        if x:",
        "            y = 1",
        "",
        "    def other(self):",
        "        pass",
    ]
    sp = structural_path_for(lines, 4)
    assert sp == "class Outer:\n    def method(self, x):"
    assert structural_path_for(lines, 1) == "class Outer:"
    assert structural_path_for([], 1) == ""


def test_binary_files_skipped_text_hunks_kept(fixture_repo):
    commit = extract_commit(fixture_repo["repo"], fixture_repo["binary_and_text"])
    assert all(h.file != "logo.bin" for h in commit.hunks)
    assert any(h.file == "alpha.py" for h in commit.hunks)


def test_binary_only_commit_is_empty(fixture_repo):
    with pytest.raises(EmptyCommitError):
        extract_commit(fixture_repo["repo"], fixture_repo["binary_only"])
