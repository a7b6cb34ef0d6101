"""Shared test fixtures: the 8-hunk motivating commit and oracle gateways."""

from __future__ import annotations

import json

from editflow.corpus.model import Commit, EditHunk
from editflow.flow.graph import FlowGraph, OrderLabel, PairLabelSet, build_flow_graph
from editflow.gateway.core import Gateway
from editflow.gateway.mock import MockProvider
from editflow.gateway.types import ChatRequest
from editflow.flow.classify import normalize_region
from editflow.recovery.hunkformat import parse_serialized_hunk

BOSS_PY = (
    "class Boss:\n"
    "    def set_active_window(self, window, switch=False):\n"
    "        self._focus(window)\n"
    "        return window\n"
    "\n"
    "    def helper(self):\n"
    "        return 1\n"
)

LAUNCH_PY = (
    "def launch(boss, opts, active):\n"
    "    if opts.keep_focus and active:\n"
    "        boss.set_active_window(active, switch=True)\n"
    "    return active\n"
)

WINDOW_PY = (
    "def set_active_window_impl(win):\n"
    "    return win.activate()\n"
    "\n"
    "\n"
    "def redraw(win):\n"
    "    win.paint()\n"
    "\n"
    "\n"
    "def focus_next(win):\n"
    "    return win.next()\n"
)

TAB_PY = (
    "def set_active_tab(tab):\n"
    "    return tab.focus()\n"
    "\n"
    "\n"
    "def set_active_tab_idx(idx):\n"
    "    return idx\n"
)

PRE_STATE = {
    "src/boss.py": BOSS_PY,
    "src/launch.py": LAUNCH_PY,
    "src/window.py": WINDOW_PY,
    "src/tab.py": TAB_PY,
}


def _one_line(hid, file, line, pre, post, structural=""):
    return EditHunk(
        id=hid,
        file=file,
        line_start=line,
        line_end=line,
        content_pre=pre + "\n",
        content_post=post + "\n",
        structural_path=structural,
    )


def make_motivating_commit() -> Commit:
    """Synthetic stand-in with the §-of-record topology: 8 hunks, 4 files."""
    hunks = (
        _one_line(
            "h1", "src/boss.py", 2,
            "    def set_active_window(self, window, switch=False):",
            "    def set_active_window(self, window, switch=False, for_keep_focus=False):",
            structural="class Boss:",
        ),
        _one_line(
            "h2", "src/boss.py", 3,
            "        self._focus(window)",
            "        self._focus(window)\n        if for_keep_focus:\n            self._trim_history(window)",
            structural="class Boss:\n    def set_active_window(self, window, switch=False):",
        ),
        _one_line(
            "h3", "src/launch.py", 3,
            "        boss.set_active_window(active, switch=True)",
            "        boss.set_active_window(active, switch=True, for_keep_focus=True)",
            structural="def launch(boss, opts, active):",
        ),
        _one_line(
            "h4", "src/window.py", 2,
            "    return win.activate()",
            "    return win.activate(keep_focus=True)",
            structural="def set_active_window_impl(win):",
        ),
        _one_line(
            "h5", "src/tab.py", 2,
            "    return tab.focus()",
            "    return tab.focus(keep=True)",
            structural="def set_active_tab(tab):",
        ),
        _one_line(
            "h6", "src/tab.py", 6,
            "    return idx",
            "    return clamp(idx)",
            structural="def set_active_tab_idx(idx):",
        ),
        _one_line(
            "h7", "src/window.py", 6,
            "    win.paint()",
            "    win.paint(force=True)",
            structural="def redraw(win):",
        ),
        _one_line(
            "h8", "src/window.py", 10,
            "    return win.next()",
            "    return win.next(skip_hidden=True)",
            structural="def focus_next(win):",
        ),
    )
    return Commit(
        commit_id="motivating",
        parent_id="motivating^",
        message="add keep-focus flag through the focus call chain",
        hunks=hunks,
        repo="synthetic",
    )


# All figure edges are bidirectional: pairs labeled "either", the rest "unrelated".
EITHER_PAIRS = [
    ("h1", "h2"), ("h1", "h3"), ("h2", "h3"), ("h2", "h4"),
    ("h2", "h5"), ("h2", "h6"), ("h4", "h7"), ("h4", "h8"),
    ("h5", "h6"), ("h7", "h8"),
]


def make_motivating_labels(commit: Commit) -> PairLabelSet:
    labels = PairLabelSet(commit_id=commit.commit_id, hunk_order=commit.hunk_ids())
    either = {tuple(sorted(p)) for p in EITHER_PAIRS}
    ids = commit.hunk_ids()
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            pair = tuple(sorted((ids[i], ids[j])))
            label = OrderLabel.EITHER if pair in either else OrderLabel.UNRELATED
            labels.set(ids[i], ids[j], label)
    return labels


def make_motivating() -> tuple[Commit, PairLabelSet, FlowGraph, dict]:
    commit = make_motivating_commit()
    labels = make_motivating_labels(commit)
    graph = build_flow_graph(list(commit.hunk_ids()), labels)
    return commit, labels, graph, dict(PRE_STATE)


# --- oracle gateway -----------------------------------------------------------


def split_pair_text(user: str) -> tuple[dict, dict]:
    head, _, tail = user.partition("\n\nEDIT B:\n")
    return parse_serialized_hunk(head.removeprefix("EDIT A:\n")), parse_serialized_hunk(tail)


def make_label_oracle(commit: Commit, labels: PairLabelSet) -> MockProvider:
    """Mock answering pair queries from the pinned label set.

    Hunks are recognized by normalized (file, post content); anything not in
    the ground truth is 'unrelated'.
    """
    key_to_id = {
        (h.file, normalize_region(h.content_post)): h.id for h in commit.hunks
    }

    def handler(req: ChatRequest) -> str | None:
        if "EDIT B:" not in req.user:
            return None
        a, b = split_pair_text(req.user)
        ia = key_to_id.get((a["file"], normalize_region(a["content_post"])))
        ib = key_to_id.get((b["file"], normalize_region(b["content_post"])))
        if ia is None or ib is None or ia == ib:
            label = OrderLabel.UNRELATED
        else:
            label = labels.get(ia, ib)
        return json.dumps({"label": label.value, "rationale": "oracle"})

    return MockProvider(handler=handler)


def oracle_gateway(commit: Commit, labels: PairLabelSet) -> Gateway:
    return Gateway(provider=make_label_oracle(commit, labels), deterministic_timing=True)


def perfect_eval_provider() -> MockProvider:
    """Answers every pair query with the label hinted inside the hunk content.

    Training fixtures embed ``label-hint:<value>`` markers in content lines.
    """

    def handler(req: ChatRequest) -> str | None:
        import re

        m = re.search(r"label-hint:(\w+)", req.user)
        if m:
            return json.dumps({"label": m.group(1), "rationale": "hint"})
        return None

    return MockProvider(handler=handler)


# --- synthetic commit generator -------------------------------------------------


def synthetic_commit(seed: int, n_hunks: int | None = None):
    """Seeded (commit, labels, graph, pre_state) with a spanning EITHER path.

    The bidirectional spanning path guarantees a one-hop successor exists at
    every intermediate state, so digital-twin walks never strand.
    """
    import random

    from editflow.flow.graph import build_flow_graph

    rng = random.Random(seed)
    n = n_hunks or rng.randint(5, 10)
    files = [f"mod_{k}.py" for k in range(rng.randint(2, 3))]
    pre_state = {
        f: "".join(f"line_{f}_{i}\n" for i in range(1, 61)) for f in files
    }
    hunks = []
    per_file_cursor = {f: 1 for f in files}
    for i in range(n):
        f = files[i % len(files)]
        line = per_file_cursor[f] + rng.randint(2, 5)
        kind = rng.choice(["replace", "grow", "insert"])
        if kind == "replace":
            h = EditHunk(
                id=f"h{i + 1}", file=f, line_start=line, line_end=line,
                content_pre=f"line_{f}_{line}\n",
                content_post=f"edit_{seed}_{i}()\n",
            )
            per_file_cursor[f] = line + 1
        elif kind == "grow":
            h = EditHunk(
                id=f"h{i + 1}", file=f, line_start=line, line_end=line,
                content_pre=f"line_{f}_{line}\n",
                content_post=f"edit_{seed}_{i}_a()\nedit_{seed}_{i}_b()\n",
            )
            per_file_cursor[f] = line + 1
        else:
            h = EditHunk(
                id=f"h{i + 1}", file=f, line_start=line, line_end=line - 1,
                content_pre="",
                content_post=f"inserted_edit_{seed}_{i}()\n",
            )
            per_file_cursor[f] = line
        hunks.append(h)
    commit = Commit(
        commit_id=f"synthetic-{seed}",
        parent_id="parent",
        message=f"synthetic change {seed}",
        hunks=tuple(hunks),
        repo="synthetic",
    )

    ids = [h.id for h in hunks]
    path = list(ids)
    rng.shuffle(path)
    path_pairs = {tuple(sorted(p)) for p in zip(path, path[1:])}
    extra = set()
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(ids, 2)
        extra.add((a, b))
    labels = PairLabelSet(commit_id=commit.commit_id, hunk_order=commit.hunk_ids())
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            key = tuple(sorted((ids[i], ids[j])))
            if key in path_pairs:
                labels.set(ids[i], ids[j], OrderLabel.EITHER)
            elif (ids[i], ids[j]) in extra:
                labels.set(ids[i], ids[j], OrderLabel.PRECEDES)
            elif (ids[j], ids[i]) in extra:
                labels.set(ids[i], ids[j], OrderLabel.FOLLOWS)
            else:
                labels.set(ids[i], ids[j], OrderLabel.UNRELATED)
    graph = build_flow_graph(ids, labels)
    return commit, labels, graph, pre_state
