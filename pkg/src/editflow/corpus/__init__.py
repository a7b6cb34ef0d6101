from editflow.corpus.model import (
    Commit,
    CommitFilter,
    EditHunk,
    commit_summary,
    invert_hunk,
    passes_filter,
)
from editflow.corpus.workspace import Workspace, apply_hunk, materialize_tree
from editflow.corpus.gitio import (
    extract_commit,
    list_commits,
    load_commit_cache,
    materialize_pre_state,
    write_commit_cache,
)

__all__ = [
    "Commit",
    "CommitFilter",
    "EditHunk",
    "Workspace",
    "apply_hunk",
    "commit_summary",
    "extract_commit",
    "invert_hunk",
    "list_commits",
    "load_commit_cache",
    "materialize_pre_state",
    "materialize_tree",
    "passes_filter",
    "write_commit_cache",
]
