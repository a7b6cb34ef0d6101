from editflow.recovery.hunkformat import parse_serialized_hunk, serialize_hunk
from editflow.recovery.dataset import (
    HunkPairSample,
    LabeledDataset,
    Split,
    commit_level_split,
    samples_from_annotation,
)
from editflow.recovery.prompts import (
    PromptCandidate,
    few_shot_prompt,
    hand_crafted_prompt,
    load_prompt_asset,
    zero_shot_prompt,
)
from editflow.recovery.infer import (
    EvalReport,
    InferenceResult,
    PartialInferenceError,
    evaluate_prompt,
    infer_graph,
    infer_order,
    parse_label,
)
from editflow.recovery.tuning import TuneResult, TunerConfig, tune_prompt

__all__ = [
    "EvalReport",
    "HunkPairSample",
    "InferenceResult",
    "LabeledDataset",
    "PartialInferenceError",
    "PromptCandidate",
    "Split",
    "TuneResult",
    "TunerConfig",
    "commit_level_split",
    "evaluate_prompt",
    "few_shot_prompt",
    "hand_crafted_prompt",
    "infer_graph",
    "infer_order",
    "load_prompt_asset",
    "parse_label",
    "parse_serialized_hunk",
    "samples_from_annotation",
    "serialize_hunk",
    "tune_prompt",
    "zero_shot_prompt",
]
