"""Labeled hunk-pair samples and the commit-level train/test split."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from editflow.corpus.model import Commit, EditHunk
from editflow.flow.graph import OrderLabel, PairLabelSet


class Split(Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class HunkPairSample:
    """An ordered hunk pair with its ground-truth order label."""

    x: tuple[EditHunk, EditHunk]
    y: OrderLabel
    commit_id: str

    def __post_init__(self) -> None:
        a, b = self.x
        if a.id == b.id:
            raise ValueError("pair of identical hunks")


@dataclass(frozen=True)
class LabeledDataset:
    samples: tuple[HunkPairSample, ...]
    split: Split | None = None

    def __len__(self) -> int:
        return len(self.samples)

    def commit_ids(self) -> set[str]:
        return {s.commit_id for s in self.samples}


def samples_from_annotation(commit: Commit, labels: PairLabelSet) -> list[HunkPairSample]:
    """One sample per labeled pair, in the stored canonical orientation."""
    by_id = {h.id: h for h in commit.hunks}
    out = []
    for (a, b), label in sorted(
        labels.entries.items(),
        key=lambda kv: (labels.hunk_order.index(kv[0][0]), labels.hunk_order.index(kv[0][1])),
    ):
        out.append(HunkPairSample(x=(by_id[a], by_id[b]), y=label, commit_id=commit.commit_id))
    return out


def commit_level_split(
    samples: list[HunkPairSample] | tuple[HunkPairSample, ...],
    train_fraction: float = 0.7,
    seed: int = 0,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Split so all samples of one commit land on the same side."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    commits = sorted({s.commit_id for s in samples})
    rng = random.Random(seed)
    rng.shuffle(commits)
    n_train = max(1, math.ceil(len(commits) * train_fraction)) if commits else 0
    train_ids = set(commits[:n_train])
    train = tuple(s for s in samples if s.commit_id in train_ids)
    test = tuple(s for s in samples if s.commit_id not in train_ids)
    return (
        LabeledDataset(samples=train, split=Split.TRAIN),
        LabeledDataset(samples=test, split=Split.TEST),
    )


__all__ = [
    "HunkPairSample",
    "LabeledDataset",
    "Split",
    "commit_level_split",
    "samples_from_annotation",
]
