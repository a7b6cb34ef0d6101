"""Pairwise order inference via prompted model calls, and prompt evaluation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from editflow.corpus.model import Commit, EditHunk
from editflow.errors import EditFlowError, GatewayError
from editflow.flow.graph import FlowGraph, OrderLabel, PairLabelSet, build_flow_graph
from editflow.gateway.core import Gateway
from editflow.gateway.types import ChatRequest
from editflow.recovery.dataset import LabeledDataset
from editflow.recovery.hunkformat import serialize_hunk
from editflow.recovery.prompts import PromptCandidate

RESPONSE_SCHEMA_INSTRUCTION = (
    'Respond with exactly one JSON object of the form '
    '{"label": "<precedes|follows|either|unrelated>", "rationale": "<one short sentence>"}. '
    'The label describes EDIT A relative to EDIT B.'
)

_LABEL_WORDS = {
    "precedes": OrderLabel.PRECEDES,
    "follows": OrderLabel.FOLLOWS,
    "either": OrderLabel.EITHER,
    "unrelated": OrderLabel.UNRELATED,
}


@dataclass(frozen=True)
class InferenceResult:
    label: OrderLabel
    label_token_logprobs: tuple[float, ...] = ()
    score: float = 0.0
    raw_text: str = ""
    parse_warning: bool = False
    logprob_warning: bool = False

    def __post_init__(self) -> None:
        if self.label_token_logprobs and self.score > 0:
            raise ValueError("score must be <= 0 when logprobs are present")


class PartialInferenceError(EditFlowError):
    """Raised when graph inference aborts mid-commit; carries partial labels."""

    def __init__(self, message: str, labels: PairLabelSet):
        super().__init__(message)
        self.labels = labels


def parse_label(text: str) -> tuple[OrderLabel | None, str]:
    """Extract the order label from model output.

    Tries strict JSON first, then a label-field regex, then a bare word scan.
    Returns (label, how) where how names the successful route, or (None, "").
    """
    try:
        obj = json.loads(text)
        if isinstance(obj, dict):
            value = str(obj.get("label", "")).strip().lower()
            if value in _LABEL_WORDS:
                return _LABEL_WORDS[value], "json"
    except ValueError:
        pass
    m = re.search(r'"label"\s*:\s*"([a-z]+)"', text, re.IGNORECASE)
    if m and m.group(1).lower() in _LABEL_WORDS:
        return _LABEL_WORDS[m.group(1).lower()], "regex"
    m = re.search(r"\b(precedes|follows|either|unrelated)\b", text, re.IGNORECASE)
    if m:
        return _LABEL_WORDS[m.group(1).lower()], "word"
    return None, ""


def _locate_tokens(text: str, tokens: tuple[tuple[str, float], ...]) -> list[tuple[int, int, float]]:
    """Char spans of each token inside ``text`` (best-effort, left to right)."""
    spans = []
    cursor = 0
    for tok, lp in tokens:
        if not tok:
            continue
        idx = text.find(tok, cursor)
        if idx < 0:
            idx = text.find(tok)
            if idx < 0:
                continue
        spans.append((idx, idx + len(tok), lp))
        cursor = idx + len(tok)
    return spans


def label_token_logprobs(
    text: str, tokens: tuple[tuple[str, float], ...] | None, label: OrderLabel
) -> tuple[float, ...]:
    """Logprobs of the tokens spelling the label's first occurrence in ``text``."""
    if not tokens:
        return ()
    m = re.search(rf"\b{label.value}\b", text, re.IGNORECASE)
    if m is None:
        return ()
    lo, hi = m.span()
    spans = _locate_tokens(text, tokens)
    hits = [lp for s, e, lp in spans if s < hi and e > lo]
    return tuple(hits)


def pair_user_text(a: EditHunk, b: EditHunk) -> str:
    return f"EDIT A:\n{serialize_hunk(a)}\n\nEDIT B:\n{serialize_hunk(b)}"


def infer_order(
    prompt: PromptCandidate,
    a: EditHunk,
    b: EditHunk,
    gw: Gateway,
    *,
    temperature: float = 0.7,
    max_output_tokens: int = 4096,
) -> InferenceResult:
    """Ask the model for the order label of (a, b) and score its confidence."""
    if a.id == b.id:
        raise ValueError("cannot infer order of a hunk against itself")
    req = ChatRequest(
        system=prompt.text + "\n\n" + RESPONSE_SCHEMA_INSTRUCTION,
        user=pair_user_text(a, b),
        temperature=temperature,
        max_output_tokens=max_output_tokens,
        want_logprobs=True,
    )
    resp = gw.complete(req)
    label, how = parse_label(resp.text)
    if label is None:
        return InferenceResult(
            label=OrderLabel.UNRELATED,
            raw_text=resp.text,
            parse_warning=True,
        )
    lps = label_token_logprobs(resp.text, resp.token_logprobs, label)
    if not lps:
        return InferenceResult(
            label=label,
            raw_text=resp.text,
            logprob_warning=True,
        )
    return InferenceResult(
        label=label,
        label_token_logprobs=lps,
        score=sum(lps) / len(lps),
        raw_text=resp.text,
    )


def infer_graph(
    prompt: PromptCandidate,
    commit: Commit,
    gw: Gateway,
    *,
    resume: PairLabelSet | None = None,
    temperature: float = 0.7,
    max_output_tokens: int = 4096,
) -> tuple[FlowGraph, PairLabelSet]:
    """Label every unordered hunk pair of a commit and induce its flow graph.

    Queries run in canonical orientation, one call per pair. On a gateway
    failure the labels gathered so far escape via
    :class:`PartialInferenceError` so callers can persist and resume.
    """
    hunks = commit.hunks
    if len(hunks) < 2:
        raise ValueError(f"{commit.commit_id}: need at least 2 hunks")
    labels = resume or PairLabelSet(commit_id=commit.commit_id, hunk_order=commit.hunk_ids())
    for i in range(len(hunks)):
        for j in range(i + 1, len(hunks)):
            key = (hunks[i].id, hunks[j].id)
            if key in labels.entries:
                continue
            try:
                result = infer_order(
                    prompt, hunks[i], hunks[j], gw,
                    temperature=temperature, max_output_tokens=max_output_tokens,
                )
            except GatewayError as exc:
                raise PartialInferenceError(
                    f"{commit.commit_id}: aborted at pair {key}: {exc}", labels
                ) from exc
            labels.set(*key, result.label)
    return build_flow_graph(list(commit.hunk_ids()), labels), labels


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    weighted_precision: float
    weighted_f1: float
    predicted: tuple[OrderLabel, ...] = field(default=(), repr=False)


def weighted_prf(
    truth: list[OrderLabel], predicted: list[OrderLabel]
) -> tuple[float, float]:
    """Support-weighted precision and F1 over the four label classes."""
    classes = list(OrderLabel)
    n = len(truth)
    precision = 0.0
    f1 = 0.0
    for c in classes:
        support = sum(1 for y in truth if y is c)
        if support == 0:
            continue
        tp = sum(1 for y, p in zip(truth, predicted) if y is c and p is c)
        pred_c = sum(1 for p in predicted if p is c)
        prec_c = tp / pred_c if pred_c else 0.0
        rec_c = tp / support
        f1_c = 2 * prec_c * rec_c / (prec_c + rec_c) if prec_c + rec_c else 0.0
        precision += support / n * prec_c
        f1 += support / n * f1_c
    return precision, f1


def evaluate_prompt(
    prompt: PromptCandidate,
    d: LabeledDataset,
    gw: Gateway,
    *,
    temperature: float = 0.7,
    max_output_tokens: int = 4096,
) -> EvalReport:
    """Accuracy plus support-weighted precision/F1 of a prompt on a dataset."""
    if not d.samples:
        raise ValueError("dataset is empty")
    predicted: list[OrderLabel] = []
    for s in d.samples:
        result = infer_order(
            prompt, s.x[0], s.x[1], gw,
            temperature=temperature, max_output_tokens=max_output_tokens,
        )
        predicted.append(result.label)
    truth = [s.y for s in d.samples]
    accuracy = sum(1 for y, p in zip(truth, predicted) if y is p) / len(truth)
    precision, f1 = weighted_prf(truth, predicted)
    return EvalReport(
        accuracy=accuracy,
        weighted_precision=precision,
        weighted_f1=f1,
        predicted=tuple(predicted),
    )


__all__ = [
    "EvalReport",
    "InferenceResult",
    "PartialInferenceError",
    "RESPONSE_SCHEMA_INSTRUCTION",
    "evaluate_prompt",
    "infer_graph",
    "infer_order",
    "label_token_logprobs",
    "pair_user_text",
    "parse_label",
    "weighted_prf",
]
