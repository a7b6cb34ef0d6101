"""Prompt candidates and the stock prompting strategies.

Zero-shot, few-shot and hand-crafted prompts are plain-text assets; all three
are just different ways of constructing a :class:`PromptCandidate`, not
separate inference paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path


@dataclass
class PromptCandidate:
    """A prompt body plus its bookkeeping from tuning."""

    text: str
    accuracy_on_train: float | None = None
    epoch_born: int = 0

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("prompt text must be nonempty")
        if self.accuracy_on_train is not None and not 0 <= self.accuracy_on_train <= 1:
            raise ValueError("accuracy must be in [0, 1]")


def _asset(name: str) -> str:
    return resources.files("editflow.recovery").joinpath("assets", name).read_text()


def zero_shot_prompt() -> PromptCandidate:
    return PromptCandidate(text=_asset("zero_shot.txt").rstrip("\n"))


def few_shot_prompt() -> PromptCandidate:
    return PromptCandidate(text=_asset("few_shot.txt").rstrip("\n"))


def hand_crafted_prompt() -> PromptCandidate:
    return PromptCandidate(text=_asset("hand_crafted.txt").rstrip("\n"))


def load_prompt_asset(path: str | Path) -> PromptCandidate:
    return PromptCandidate(text=Path(path).read_text().rstrip("\n"))


def save_prompt_asset(prompt: PromptCandidate, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(prompt.text + "\n")


__all__ = [
    "PromptCandidate",
    "few_shot_prompt",
    "hand_crafted_prompt",
    "load_prompt_asset",
    "save_prompt_asset",
    "zero_shot_prompt",
]
