"""Pairwise order labels over edit hunks and the directed graph they induce.

Labels live on unordered pairs stored in a canonical orientation (earlier
hunk first, by position in the commit). ``precedes``/``follows`` reflect into
each other when a pair is read in the opposite orientation; ``either`` and
``unrelated`` are symmetric. The relation is deliberately not transitive:
queries never chase paths, only single edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from editflow.errors import EmptyGraphError, IncompleteLabelsError, UnknownHunkError


class OrderLabel(Enum):
    PRECEDES = "precedes"
    FOLLOWS = "follows"
    EITHER = "either"
    UNRELATED = "unrelated"


_REFLECTION = {
    OrderLabel.PRECEDES: OrderLabel.FOLLOWS,
    OrderLabel.FOLLOWS: OrderLabel.PRECEDES,
    OrderLabel.EITHER: OrderLabel.EITHER,
    OrderLabel.UNRELATED: OrderLabel.UNRELATED,
}


def reflect(label: OrderLabel) -> OrderLabel:
    """Label of (b, a) given the label of (a, b)."""
    return _REFLECTION[label]


@dataclass
class PairLabelSet:
    """Order labels for every unordered hunk pair of one commit.

    ``hunk_order`` fixes the canonical orientation: the pair key always lists
    the hunk that appears earlier in the commit first.
    """

    commit_id: str
    hunk_order: tuple[str, ...]
    entries: dict[tuple[str, str], OrderLabel] = field(default_factory=dict)

    def _index(self, hunk_id: str) -> int:
        try:
            return self.hunk_order.index(hunk_id)
        except ValueError:
            raise UnknownHunkError(hunk_id) from None

    def canonical(self, a: str, b: str) -> tuple[str, str]:
        if a == b:
            raise ValueError(f"pair of identical hunks: {a}")
        return (a, b) if self._index(a) < self._index(b) else (b, a)

    def set(self, a: str, b: str, label: OrderLabel) -> None:
        key = self.canonical(a, b)
        if key != (a, b):
            label = reflect(label)
        self.entries[key] = label

    def get(self, a: str, b: str) -> OrderLabel:
        key = self.canonical(a, b)
        label = self.entries[key]
        return label if key == (a, b) else reflect(label)

    def missing_pairs(self) -> list[tuple[str, str]]:
        order = self.hunk_order
        return [
            (order[i], order[j])
            for i in range(len(order))
            for j in range(i + 1, len(order))
            if (order[i], order[j]) not in self.entries
        ]

    def is_complete(self) -> bool:
        return not self.missing_pairs()


@dataclass(frozen=True)
class FlowGraph:
    """Directed graph over hunk ids; an edge means "may naturally come next"."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge ({a},{b}) outside node set")

    def out_neighbors(self, node: str) -> set[str]:
        return {b for a, b in self.edges if a == node}

    def in_degree(self, node: str) -> int:
        return sum(1 for _, b in self.edges if b == node)


def build_flow_graph(hunk_ids: list[str] | tuple[str, ...], labels: PairLabelSet) -> FlowGraph:
    """Induce the directed graph from a complete label set.

    ``precedes`` on canonical (a, b) contributes (a, b); ``follows``
    contributes (b, a); ``either`` contributes both; ``unrelated`` nothing.
    """
    ids = tuple(hunk_ids)
    missing = _missing_label_pairs(ids, labels)
    if missing:
        raise IncompleteLabelsError(f"unlabeled pairs: {missing[:5]}{'...' if len(missing) > 5 else ''}")
    edges: set[tuple[str, str]] = set()
    for (a, b), label in labels.entries.items():
        if a not in ids or b not in ids:
            continue
        if label is OrderLabel.PRECEDES:
            edges.add((a, b))
        elif label is OrderLabel.FOLLOWS:
            edges.add((b, a))
        elif label is OrderLabel.EITHER:
            edges.add((a, b))
            edges.add((b, a))
    return FlowGraph(nodes=frozenset(ids), edges=frozenset(edges))


def _missing_label_pairs(ids: tuple[str, ...], labels: PairLabelSet) -> list[tuple[str, str]]:
    missing = []
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            try:
                labels.get(ids[i], ids[j])
            except KeyError:
                missing.append((ids[i], ids[j]))
    return missing


def successors(g: FlowGraph, prior: set[str] | frozenset[str]) -> set[str]:
    """One-hop successors: unapplied nodes reachable by a single edge from ``prior``."""
    for h in prior:
        if h not in g.nodes:
            raise UnknownHunkError(h)
    return {b for a, b in g.edges if a in prior and b not in prior}


def min_indegree_candidates(g: FlowGraph) -> set[str]:
    """All nodes tied for the minimum in-degree (natural starting edits)."""
    if not g.nodes:
        raise EmptyGraphError("graph has no nodes")
    degrees = {n: 0 for n in g.nodes}
    for _, b in g.edges:
        degrees[b] += 1
    lowest = min(degrees.values())
    return {n for n, d in degrees.items() if d == lowest}


# --- annotation files and graph export ---------------------------------------

ANNOTATION_SCHEMA = "editflow-annotation/1"


def write_annotation(labels: PairLabelSet, repo: str, path: Path) -> None:
    """Persist a label set as the canonical-orientation annotation document."""
    pairs = [
        {"a": a, "b": b, "label": label.value}
        for (a, b), label in sorted(
            labels.entries.items(),
            key=lambda kv: (labels.hunk_order.index(kv[0][0]), labels.hunk_order.index(kv[0][1])),
        )
    ]
    doc = {
        "schema": ANNOTATION_SCHEMA,
        "commit_id": labels.commit_id,
        "repo": repo,
        "hunk_order": list(labels.hunk_order),
        "pairs": pairs,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_annotation(path: Path) -> PairLabelSet:
    data = json.loads(Path(path).read_text())
    labels = PairLabelSet(
        commit_id=data["commit_id"],
        hunk_order=tuple(data["hunk_order"]),
    )
    for pair in data["pairs"]:
        labels.set(pair["a"], pair["b"], OrderLabel(pair["label"]))
    return labels


def export_graph(g: FlowGraph) -> dict:
    """Node/edge list document for visualization tooling."""
    return {
        "nodes": sorted(g.nodes),
        "edges": [[a, b] for a, b in sorted(g.edges)],
    }


def graph_from_dict(data: dict) -> FlowGraph:
    return FlowGraph(
        nodes=frozenset(data["nodes"]),
        edges=frozenset((a, b) for a, b in data["edges"]),
    )


__all__ = [
    "ANNOTATION_SCHEMA",
    "FlowGraph",
    "OrderLabel",
    "PairLabelSet",
    "build_flow_graph",
    "export_graph",
    "graph_from_dict",
    "load_annotation",
    "min_indegree_candidates",
    "reflect",
    "successors",
    "write_annotation",
]
