"""Order inference, graph inference, and prompt evaluation on scripted mocks."""

from __future__ import annotations

import json
import random

import pytest

from helpers import (
    make_motivating,
    oracle_gateway,
    perfect_eval_provider,
)
from editflow.corpus.model import EditHunk
from editflow.errors import RateLimitedError
from editflow.flow.graph import OrderLabel
from editflow.gateway.core import Gateway
from editflow.gateway.mock import MockProvider, MockRoute
from editflow.recovery.dataset import (
    HunkPairSample,
    LabeledDataset,
    commit_level_split,
    samples_from_annotation,
)
from editflow.recovery.infer import (
    PartialInferenceError,
    evaluate_prompt,
    infer_graph,
    infer_order,
    parse_label,
    weighted_prf,
)
from editflow.recovery.prompts import (
    PromptCandidate,
    few_shot_prompt,
    hand_crafted_prompt,
    zero_shot_prompt,
)


def mk_hunk(hid: str, marker: str) -> EditHunk:
    return EditHunk(
        id=hid, file=f"{hid}.py", line_start=1, line_end=1,
        content_pre=f"old {marker}\n", content_post=f"new {marker}\n",
    )


PROMPT = PromptCandidate(text="Decide the natural order of the two edits.")


class TestParseLabel:
    def test_strict_json(self):
        assert parse_label('{"label": "precedes", "rationale": "r"}') == (OrderLabel.PRECEDES, "json")

    def test_regex_inside_noise(self):
        text = 'Sure! Here you go: {"label": "follows", "rationale": "because"} hope it helps'
        assert parse_label(text) == (OrderLabel.FOLLOWS, "regex")

    def test_bare_word(self):
        assert parse_label("I think these are Unrelated to each other") == (
            OrderLabel.UNRELATED,
            "word",
        )

    def test_unparseable(self):
        assert parse_label("no idea") == (None, "")


class TestInferOrder:
    def test_scripted_label_and_mean_score(self):
        mock = MockProvider(
            routes=[MockRoute(match="EDIT A", response="precedes",
                              logprobs=(("pre", -0.1), ("cedes", -0.3)))]
        )
        gw = Gateway(provider=mock, deterministic_timing=True)
        result = infer_order(PROMPT, mk_hunk("a", "m1"), mk_hunk("b", "m2"), gw)
        assert result.label is OrderLabel.PRECEDES
        assert result.score == pytest.approx(-0.2)
        assert result.label_token_logprobs == (-0.1, -0.3)

    def test_malformed_output_falls_back_to_unrelated(self):
        gw = Gateway(
            provider=MockProvider(default_response="???"), deterministic_timing=True
        )
        result = infer_order(PROMPT, mk_hunk("a", "m1"), mk_hunk("b", "m2"), gw)
        assert result.label is OrderLabel.UNRELATED
        assert result.parse_warning
        assert result.score == 0.0

    def test_swapped_arguments_reflect_with_consistent_mock(self):
        commit, labels, graph, _ = make_motivating()
        gw = oracle_gateway(commit, labels)
        h1, h3 = commit.hunk("h1"), commit.hunk("h3")
        fwd = infer_order(PROMPT, h1, h3, gw)
        rev = infer_order(PROMPT, h3, h1, gw)
        from editflow.flow.graph import reflect

        assert rev.label is reflect(fwd.label)

    def test_same_hunk_rejected(self):
        gw = Gateway(provider=MockProvider(), deterministic_timing=True)
        with pytest.raises(ValueError):
            infer_order(PROMPT, mk_hunk("a", "m"), mk_hunk("a", "m"), gw)


class TestInferGraph:
    def test_call_count_is_pair_count(self, motivating):
        commit, labels, graph, _ = motivating
        gw = oracle_gateway(commit, labels)
        five = commit.hunks[:5]
        from editflow.corpus.model import Commit

        small = Commit("c5", "p", "m", five, repo="synthetic")
        infer_graph(PROMPT, small, gw)
        assert len(gw.ledger) == 10

    def test_unrelated_everywhere_gives_edgeless_graph(self, motivating):
        commit, *_ = motivating
        gw = Gateway(
            provider=MockProvider(default_response='{"label": "unrelated"}'),
            deterministic_timing=True,
        )
        graph, labels = infer_graph(PROMPT, commit, gw)
        assert graph.edges == frozenset()
        assert labels.is_complete()

    def test_oracle_mock_reproduces_pinned_graph(self, motivating):
        commit, labels, graph, _ = motivating
        gw = oracle_gateway(commit, labels)
        inferred_graph, inferred_labels = infer_graph(PROMPT, commit, gw)
        assert inferred_graph == graph
        assert inferred_labels.entries == labels.entries

    def test_partial_artifact_and_resume(self, motivating):
        commit, labels, graph, _ = motivating
        budget = {"left": 11}
        oracle = oracle_gateway(commit, labels).provider

        class Budgeted:
            name = "budgeted"

            def complete(self, req):
                if budget["left"] <= 0:
                    raise RateLimitedError("budget spent")
                budget["left"] -= 1
                return oracle.complete(req)

        gw = Gateway(provider=Budgeted(), max_retries=0, deterministic_timing=True)
        with pytest.raises(PartialInferenceError) as exc_info:
            infer_graph(PROMPT, commit, gw)
        partial = exc_info.value.labels
        assert 0 < len(partial.entries) < 28
        budget["left"] = 10_000
        inferred_graph, _ = infer_graph(PROMPT, commit, gw, resume=partial)
        assert inferred_graph == graph

    def test_single_hunk_commit_rejected(self, motivating):
        commit, labels, *_ = motivating
        from editflow.corpus.model import Commit

        single = Commit("c1", "p", "m", commit.hunks[:1], repo="synthetic")
        gw = oracle_gateway(commit, labels)
        with pytest.raises(ValueError):
            infer_graph(PROMPT, single, gw)


def hint_sample(i: int, label: OrderLabel, commit_id="c") -> HunkPairSample:
    a = EditHunk(id=f"a{i}", file=f"a{i}.py", line_start=1, line_end=1,
                 content_pre=f"x{i}\n", content_post=f"y{i} label-hint:{label.value}\n")
    b = EditHunk(id=f"b{i}", file=f"b{i}.py", line_start=1, line_end=1,
                 content_pre=f"p{i}\n", content_post=f"q{i}\n")
    return HunkPairSample(x=(a, b), y=label, commit_id=commit_id)


class TestEvaluatePrompt:
    def test_perfect_oracle_scores_one(self):
        samples = [hint_sample(i, list(OrderLabel)[i % 4]) for i in range(12)]
        gw = Gateway(provider=perfect_eval_provider(), deterministic_timing=True)
        report = evaluate_prompt(PROMPT, LabeledDataset(samples=tuple(samples)), gw)
        assert report.accuracy == 1.0
        assert report.weighted_precision == 1.0
        assert report.weighted_f1 == 1.0

    def test_constant_answer_on_balanced_set(self):
        samples = [hint_sample(i, list(OrderLabel)[i % 4]) for i in range(40)]
        gw = Gateway(
            provider=MockProvider(default_response='{"label": "precedes"}'),
            deterministic_timing=True,
        )
        report = evaluate_prompt(PROMPT, LabeledDataset(samples=tuple(samples)), gw)
        assert report.accuracy == pytest.approx(0.25)

    def test_against_sklearn_confusion_matrix(self):
        """Independent oracle for the weighted metrics on a scripted 40-sample set."""
        sklearn_metrics = pytest.importorskip("sklearn.metrics")
        rng = random.Random(5)
        truth, predicted = [], []
        samples = []
        classes = list(OrderLabel)
        for i in range(40):
            y = classes[rng.randrange(4)]
            p = y if i < 30 else classes[(classes.index(y) + 1 + rng.randrange(3)) % 4]
            truth.append(y)
            predicted.append(p)
            samples.append((y, p))

        class Scripted:
            name = "scripted"

            def __init__(self):
                self.i = 0

            def complete(self, req):
                p = samples[self.i][1]
                self.i += 1
                return MockProvider(
                    default_response=json.dumps({"label": p.value})
                ).complete(req)

        ds = tuple(hint_sample(i, y) for i, (y, _) in enumerate(samples))
        gw = Gateway(provider=Scripted(), deterministic_timing=True)
        report = evaluate_prompt(PROMPT, LabeledDataset(samples=ds), gw)
        assert report.accuracy == pytest.approx(30 / 40)

        y_true = [y.value for y, _ in samples]
        y_pred = [p.value for _, p in samples]
        expected_p, _, expected_f1, _ = sklearn_metrics.precision_recall_fscore_support(
            y_true, y_pred, average="weighted", zero_division=0
        )
        assert report.weighted_precision == pytest.approx(expected_p)
        assert report.weighted_f1 == pytest.approx(expected_f1)

    def test_accuracy_invariant_under_permutation(self):
        samples = [hint_sample(i, list(OrderLabel)[i % 4]) for i in range(16)]
        gw = Gateway(provider=perfect_eval_provider(), deterministic_timing=True)
        shuffled = list(samples)
        random.Random(3).shuffle(shuffled)
        a = evaluate_prompt(PROMPT, LabeledDataset(samples=tuple(samples)), gw).accuracy
        b = evaluate_prompt(PROMPT, LabeledDataset(samples=tuple(shuffled)), gw).accuracy
        assert a == b


class TestDataset:
    def test_commit_level_split_is_pure(self):
        samples = []
        for c in range(10):
            for i in range(4):
                samples.append(hint_sample(c * 10 + i, OrderLabel.EITHER, commit_id=f"c{c}"))
        train, test = commit_level_split(samples, train_fraction=0.7, seed=1)
        assert train.commit_ids() & test.commit_ids() == set()
        assert len(train) + len(test) == len(samples)
        assert len(train.commit_ids()) == 7

    def test_samples_from_annotation_canonical(self, motivating):
        commit, labels, *_ = motivating
        samples = samples_from_annotation(commit, labels)
        assert len(samples) == 28
        ids = commit.hunk_ids()
        for s in samples:
            assert ids.index(s.x[0].id) < ids.index(s.x[1].id)

    def test_pair_of_identical_hunks_rejected(self):
        h = mk_hunk("a", "m")
        with pytest.raises(ValueError):
            HunkPairSample(x=(h, h), y=OrderLabel.EITHER, commit_id="c")


class TestPromptAssets:
    def test_stock_prompts_nonempty_and_distinct(self):
        texts = {zero_shot_prompt().text, few_shot_prompt().text, hand_crafted_prompt().text}
        assert len(texts) == 3
        assert all(texts)

    def test_few_shot_has_eight_examples(self):
        text = few_shot_prompt().text
        assert text.count("Example ") == 8
        assert text.count("label: either") == 4
        assert text.count("label: unrelated") == 4


def test_weighted_prf_all_wrong_is_zero():
    truth = [OrderLabel.PRECEDES] * 4
    predicted = [OrderLabel.FOLLOWS] * 4
    precision, f1 = weighted_prf(truth, predicted)
    assert precision == 0.0 and f1 == 0.0
