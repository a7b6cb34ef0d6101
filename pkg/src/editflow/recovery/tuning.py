"""Feedback-driven prompt search for the order-recovery task.

One run proceeds in two phases. Seeding: the training set is shuffled and cut
into batches, and each batch is summarized into an initial prompt candidate.
Refinement: for a fixed number of epochs, samples are partitioned into those
the current best prompt labels correctly and those it gets wrong, re-batched
so every batch contains members of both sides, and each batch drives one
feedback call followed by one integration call that yields a new candidate.
Candidates are always scored on the full training set. When no sample is
mispredicted the run has converged and stops early.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

from editflow.errors import GatewayError
from editflow.flow.graph import OrderLabel
from editflow.gateway.core import Gateway
from editflow.gateway.types import ChatRequest
from editflow.recovery.dataset import HunkPairSample, LabeledDataset
from editflow.recovery.infer import evaluate_prompt, pair_user_text
from editflow.recovery.prompts import PromptCandidate

SUMMARIZE_INSTRUCTION = (
    "TASK: summarize-prompt. You are given labeled pairs of code edits. "
    "Write one reusable instruction prompt that would let a model predict the "
    "order label (precedes, follows, either, unrelated) for unseen pairs. "
    "Answer with the prompt text only."
)

FEEDBACK_INSTRUCTION = (
    "TASK: generate-feedback. You are given the current instruction prompt and "
    "a batch of labeled pairs annotated with the model's answers. Explain why "
    "the correct answers succeeded and the incorrect ones failed, as concrete "
    "guidance for revising the prompt. Answer with the feedback text only."
)

INTEGRATE_INSTRUCTION = (
    "TASK: integrate-feedback. You are given the current instruction prompt "
    "and feedback about its mistakes. Rewrite the prompt so it keeps what "
    "works and fixes the reported problems. Answer with the prompt text only."
)

CHECKPOINT_SCHEMA = "editflow-tuner-checkpoint/1"


@dataclass(frozen=True)
class TunerConfig:
    epochs: int = 5
    batch_size: int = 32
    temperature: float = 0.7
    max_output_tokens: int = 4096
    keep_global_best: bool = True
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2 (mixed batches need both sides)")


@dataclass
class _Scored:
    candidate: PromptCandidate
    predicted: tuple[OrderLabel, ...]


@dataclass
class TuneResult:
    best: PromptCandidate
    candidates: list[PromptCandidate]
    best_accuracy_by_epoch: list[float]
    epochs_run: int
    terminated_early: bool

    def to_dict(self) -> dict:
        return {
            "best": {"text": self.best.text, "accuracy": self.best.accuracy_on_train},
            "candidates": [
                {"text": c.text, "accuracy": c.accuracy_on_train, "epoch_born": c.epoch_born}
                for c in self.candidates
            ],
            "best_accuracy_by_epoch": self.best_accuracy_by_epoch,
            "epochs_run": self.epochs_run,
            "terminated_early": self.terminated_early,
        }


def _chunk(samples: list[HunkPairSample], batch_size: int, rng: random.Random) -> list[list[HunkPairSample]]:
    shuffled = list(samples)
    rng.shuffle(shuffled)
    k = max(1, math.ceil(len(shuffled) / batch_size))
    size = math.ceil(len(shuffled) / k)
    return [shuffled[i : i + size] for i in range(0, len(shuffled), size)]


def _mixed_batches(
    s_plus: list[HunkPairSample],
    s_minus: list[HunkPairSample],
    batch_size: int,
    rng: random.Random,
) -> list[list[HunkPairSample]]:
    """Round-robin fill so every batch meets both sides (when both exist)."""
    n = len(s_plus) + len(s_minus)
    k = max(1, math.ceil(n / batch_size))
    if s_plus and s_minus:
        k = min(k, len(s_plus), len(s_minus))
    plus = list(s_plus)
    minus = list(s_minus)
    rng.shuffle(plus)
    rng.shuffle(minus)
    batches: list[list[HunkPairSample]] = [[] for _ in range(k)]
    for i, s in enumerate(plus):
        batches[i % k].append(s)
    for i, s in enumerate(minus):
        batches[i % k].append(s)
    return batches


def _render_samples(samples: list[HunkPairSample], predicted: dict[int, OrderLabel] | None = None) -> str:
    parts = []
    for i, s in enumerate(samples, start=1):
        block = f"### Sample {i}\n{pair_user_text(s.x[0], s.x[1])}\nlabel: {s.y.value}"
        if predicted is not None:
            p = predicted[id(s)]
            verdict = "CORRECT" if p is s.y else "INCORRECT"
            block += f"\nmodel answered: {p.value} ({verdict})"
        parts.append(block)
    return "\n\n".join(parts)


def _ask(gw: Gateway, cfg: TunerConfig, system: str, user: str) -> str:
    resp = gw.complete(
        ChatRequest(
            system=system,
            user=user,
            temperature=cfg.temperature,
            max_output_tokens=cfg.max_output_tokens,
        )
    )
    return resp.text.strip()


class _Run:
    """Mutable tuning state, checkpointable between epochs."""

    def __init__(self, d_tr: LabeledDataset, cfg: TunerConfig, gw: Gateway):
        if not d_tr.samples:
            raise ValueError("training dataset is empty")
        self.samples = list(d_tr.samples)
        self.cfg = cfg
        self.gw = gw
        self.rng = random.Random(cfg.rng_seed)
        self.scored: list[_Scored] = []
        self.best_accuracy_by_epoch: list[float] = []
        self.completed_epochs = 0
        self.terminated_early = False
        self.seeded = False
        # RNG state at the last epoch boundary; checkpoints store this so an
        # aborted epoch re-runs from its start and matches a clean run.
        self._boundary_rng = self.rng.getstate()

    # -- scoring ---------------------------------------------------------

    def _score(self, candidate: PromptCandidate) -> _Scored:
        report = evaluate_prompt(
            candidate,
            LabeledDataset(samples=tuple(self.samples)),
            self.gw,
            temperature=self.cfg.temperature,
            max_output_tokens=self.cfg.max_output_tokens,
        )
        candidate.accuracy_on_train = report.accuracy
        entry = _Scored(candidate=candidate, predicted=report.predicted)
        self.scored.append(entry)
        return entry

    def _argmax(self, entries: list[_Scored]) -> _Scored:
        best = entries[0]
        for e in entries[1:]:
            if e.candidate.accuracy_on_train > best.candidate.accuracy_on_train:
                best = e
        return best

    def current_best(self) -> _Scored:
        if self.cfg.keep_global_best:
            return self._argmax(self.scored)
        return self._last_epoch_best

    # -- phases ----------------------------------------------------------

    def seed(self) -> None:
        for batch in _chunk(self.samples, self.cfg.batch_size, self.rng):
            text = _ask(self.gw, self.cfg, SUMMARIZE_INSTRUCTION, _render_samples(batch))
            self._score(PromptCandidate(text=text or "(empty prompt)", epoch_born=0))
        self._last_epoch_best = self._argmax(self.scored)
        self.seeded = True
        self._boundary_rng = self.rng.getstate()

    def run_epoch(self, epoch: int) -> bool:
        """One refinement epoch; returns False when converged."""
        p_star = self.current_best()
        correct_ids = {
            id(s) for s, p in zip(self.samples, p_star.predicted) if p is s.y
        }
        s_plus = [s for s in self.samples if id(s) in correct_ids]
        s_minus = [s for s in self.samples if id(s) not in correct_ids]
        if not s_minus:
            self.terminated_early = True
            return False

        predicted_by_sample = {
            id(s): p for s, p in zip(self.samples, p_star.predicted)
        }
        epoch_entries: list[_Scored] = []
        for batch in _mixed_batches(s_plus, s_minus, self.cfg.batch_size, self.rng):
            feedback = _ask(
                self.gw,
                self.cfg,
                FEEDBACK_INSTRUCTION,
                f"CURRENT PROMPT:\n<<<\n{p_star.candidate.text}\n>>>\n\n"
                + _render_samples(batch, predicted_by_sample),
            )
            refined = _ask(
                self.gw,
                self.cfg,
                INTEGRATE_INSTRUCTION,
                f"CURRENT PROMPT:\n<<<\n{p_star.candidate.text}\n>>>\n\nFEEDBACK:\n{feedback}",
            )
            epoch_entries.append(
                self._score(PromptCandidate(text=refined or "(empty prompt)", epoch_born=epoch))
            )
        if epoch_entries:
            self._last_epoch_best = self._argmax(epoch_entries)
        return True

    def finish_epoch(self) -> None:
        self.completed_epochs += 1
        self.best_accuracy_by_epoch.append(self.current_best().candidate.accuracy_on_train)
        self._boundary_rng = self.rng.getstate()

    def result(self) -> TuneResult:
        best = self.current_best()
        return TuneResult(
            best=best.candidate,
            candidates=[e.candidate for e in self.scored],
            best_accuracy_by_epoch=list(self.best_accuracy_by_epoch),
            epochs_run=self.completed_epochs,
            terminated_early=self.terminated_early,
        )

    # -- checkpointing ---------------------------------------------------

    def to_checkpoint(self) -> dict:
        # Candidates born in an unfinished epoch are dropped: the epoch will
        # re-run from the stored boundary RNG state on resume.
        persisted = [e for e in self.scored if e.candidate.epoch_born <= self.completed_epochs]
        last_best = None
        if hasattr(self, "_last_epoch_best") and self._last_epoch_best in persisted:
            last_best = persisted.index(self._last_epoch_best)
        return {
            "schema": CHECKPOINT_SCHEMA,
            "config": {
                "epochs": self.cfg.epochs,
                "batch_size": self.cfg.batch_size,
                "temperature": self.cfg.temperature,
                "max_output_tokens": self.cfg.max_output_tokens,
                "keep_global_best": self.cfg.keep_global_best,
                "rng_seed": self.cfg.rng_seed,
            },
            "seeded": self.seeded,
            "completed_epochs": self.completed_epochs,
            "terminated_early": self.terminated_early,
            "best_accuracy_by_epoch": self.best_accuracy_by_epoch,
            "rng_state": _state_to_json(self._boundary_rng),
            "candidates": [
                {
                    "text": e.candidate.text,
                    "accuracy": e.candidate.accuracy_on_train,
                    "epoch_born": e.candidate.epoch_born,
                    "predicted": [p.value for p in e.predicted],
                }
                for e in persisted
            ],
            "last_epoch_best": last_best,
        }

    def restore(self, data: dict) -> None:
        self.seeded = data["seeded"]
        self.completed_epochs = data["completed_epochs"]
        self.terminated_early = data["terminated_early"]
        self.best_accuracy_by_epoch = list(data["best_accuracy_by_epoch"])
        self.rng.setstate(_state_from_json(data["rng_state"]))
        self._boundary_rng = self.rng.getstate()
        self.scored = []
        for c in data["candidates"]:
            cand = PromptCandidate(
                text=c["text"], accuracy_on_train=c["accuracy"], epoch_born=c["epoch_born"]
            )
            self.scored.append(
                _Scored(candidate=cand, predicted=tuple(OrderLabel(v) for v in c["predicted"]))
            )
        idx = data.get("last_epoch_best")
        if idx is not None:
            self._last_epoch_best = self.scored[idx]


def _state_to_json(state: tuple) -> list:
    return [state[0], list(state[1]), state[2]]


def _state_from_json(data: list) -> tuple:
    return (data[0], tuple(data[1]), data[2])


def tune_prompt(
    d_tr: LabeledDataset,
    cfg: TunerConfig,
    gw: Gateway,
    *,
    checkpoint_path: Path | None = None,
    resume: bool = False,
) -> TuneResult:
    """Search for the best order-recovery prompt on the training set.

    With ``keep_global_best`` the returned candidate is the accuracy argmax
    over everything ever scored (ties to the earliest); otherwise the run
    follows the epoch-local argmax faithfully even if it regresses. The whole
    run is a pure function of (dataset order, config seed, provider).
    """
    run = _Run(d_tr, cfg, gw)
    if resume and checkpoint_path is not None and checkpoint_path.exists():
        run.restore(json.loads(checkpoint_path.read_text()))

    def save() -> None:
        if checkpoint_path is not None:
            checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
            checkpoint_path.write_text(json.dumps(run.to_checkpoint(), indent=2) + "\n")

    try:
        if not run.seeded:
            run.seed()
            save()
        for epoch in range(run.completed_epochs + 1, cfg.epochs + 1):
            if run.terminated_early:
                break
            if not run.run_epoch(epoch):
                save()
                break
            run.finish_epoch()
            save()
    except GatewayError:
        save()
        raise
    return run.result()


__all__ = [
    "CHECKPOINT_SCHEMA",
    "FEEDBACK_INSTRUCTION",
    "INTEGRATE_INSTRUCTION",
    "SUMMARIZE_INSTRUCTION",
    "TuneResult",
    "TunerConfig",
    "tune_prompt",
]
