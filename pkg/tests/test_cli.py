"""End-to-end command flow over the fixture repository with a scripted mock."""

from __future__ import annotations

import json

import pytest

from editflow.cli import main
from editflow.corpus.gitio import extract_commit, list_commits, load_commit_cache
from editflow.corpus.model import CommitFilter, passes_filter
from editflow.errors import EmptyCommitError, MergeCommitError, MissingParentError
from editflow.flow.graph import OrderLabel, PairLabelSet, write_annotation


@pytest.fixture()
def env(fixture_repo, tmp_path):
    """Config + output dir wired to the session fixture repo."""
    out = tmp_path / "out"
    mock_script = tmp_path / "mock.json"
    mock_script.write_text(json.dumps({"entries": [], "default": '{"label": "either", "rationale": "r"}'}))
    config = {
        "output_dir": str(out),
        "repos": {"fixture": fixture_repo["repo"]},
        "commit_filter": {"min_hunks": 5, "max_hunks": 10, "min_files": 2},
        "gateway": {"provider": "mock", "mock_script": str(mock_script),
                    "price_in": 1e-6, "price_out": 2e-6},
        "tuner": {"epochs": 2, "batch_size": 8, "rng_seed": 5},
        "simulation": {"seed": 314, "batch_cap": 10, "workers": 2},
        "suts": {
            "mock": {"kind": "mock", "noise": {"break_rate": 0.2}},
        },
        "thresholds": {},
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    return {"config": cfg_path, "out": out, "raw": config, "tmp": tmp_path}


def rewrite_config(env, mutate) -> None:
    raw = env["raw"]
    mutate(raw)
    env["config"].write_text(json.dumps(raw))


class TestExtract:
    def test_expected_subset_cached(self, env, fixture_repo, capsys):
        rc = main(["extract", "--config", str(env["config"]), "--repo", "fixture", "--json"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)

        expected = 0
        flt = CommitFilter(min_hunks=5, max_hunks=10, min_files=2)
        for sha in list_commits(fixture_repo["repo"], "HEAD"):
            try:
                commit = extract_commit(fixture_repo["repo"], sha)
            except (MergeCommitError, MissingParentError, EmptyCommitError):
                continue
            if passes_filter(commit, flt):
                expected += 1
        assert payload["accepted"] == expected
        assert len(list((env["out"] / "commits").glob("*.json"))) == expected
        assert any(c["sequence_space_size"] == 40320 for c in payload["commits"] if c["hunks"] == 8)

    def test_empty_range_succeeds_with_zero(self, env, capsys):
        rc = main(["extract", "--config", str(env["config"]), "--repo", "fixture",
                   "--rev-range", "HEAD..HEAD", "--json"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["accepted"] == 0

    def test_unknown_repo_exits_2(self, env):
        assert main(["extract", "--config", str(env["config"]), "--repo", "nope"]) == 2

    def test_nonexistent_repo_path_rejected_at_load(self, env):
        rewrite_config(env, lambda raw: raw["repos"].update({"bad": "/does/not/exist"}))
        assert main(["extract", "--config", str(env["config"]), "--repo", "bad"]) == 2


def run_pipeline_through_graphs(env) -> int:
    assert main(["extract", "--config", str(env["config"]), "--repo", "fixture"]) == 0
    rc = main(["infer-graph", "--config", str(env["config"])])
    return rc


class TestInferGraph:
    def test_graphs_written_and_idempotent(self, env, capsys):
        assert run_pipeline_through_graphs(env) == 0
        graphs = sorted((env["out"] / "graphs").glob("*[!s].json"))
        commits = sorted((env["out"] / "commits").glob("*.json"))
        graph_files = [p for p in graphs if not p.name.endswith(".labels.json")]
        assert len(graph_files) == len(commits)
        # All-either mock: every pair contributes both edges.
        data = json.loads(graph_files[0].read_text())
        n = len(data["nodes"])
        assert len(data["edges"]) == n * (n - 1)
        before = {p: p.read_bytes() for p in graph_files}
        assert main(["infer-graph", "--config", str(env["config"])]) == 0
        assert {p: p.read_bytes() for p in graph_files} == before


class TestTune:
    def test_tune_writes_prompt_and_checkpoint(self, env, capsys):
        assert main(["extract", "--config", str(env["config"]), "--repo", "fixture"]) == 0
        cache = next((env["out"] / "commits").glob("*.json"))
        commit = load_commit_cache(cache)
        labels = PairLabelSet(commit_id=commit.commit_id, hunk_order=commit.hunk_ids())
        ids = commit.hunk_ids()
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                labels.set(ids[i], ids[j], OrderLabel.EITHER)
        ann = env["tmp"] / "ann.json"
        write_annotation(labels, commit.repo, ann)
        capsys.readouterr()  # drop extract output

        rc = main(["tune", "--config", str(env["config"]), "--annotations", str(ann), "--json"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["best_accuracy"] == 1.0
        assert (env["out"] / "tuned_prompt.txt").exists()
        assert (env["out"] / "tuner_checkpoint.json").exists()

        rc = main(["tune", "--config", str(env["config"]), "--annotations", str(ann),
                   "--resume", "--json"])
        assert rc == 0
        resumed = json.loads(capsys.readouterr().out)
        assert resumed["best_accuracy"] == payload["best_accuracy"]
        assert resumed["candidates"] == payload["candidates"]


class TestSimulateAndReport:
    def test_full_flow(self, env, capsys):
        assert run_pipeline_through_graphs(env) == 0
        capsys.readouterr()  # drop pipeline output
        rc = main(["simulate", "--config", str(env["config"]), "--sut", "mock", "--json"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        traces = sorted((env["out"] / "traces" / "mock" / "original").glob("*.json"))
        assert payload["traces"] == len(traces) > 0

        before = {p: p.read_bytes() for p in traces}
        assert main(["simulate", "--config", str(env["config"]), "--sut", "mock",
                     "--force", "--json"]) == 0
        capsys.readouterr()
        assert {p: p.read_bytes() for p in traces} == before  # seeded rerun identical

        rc = main(["report", "--config", str(env["config"])])
        out = capsys.readouterr().out
        assert rc == 0
        assert "mock" in out and "original" in out
        report = json.loads((env["out"] / "report.json").read_text())
        assert report["rows"][0]["traces"] == len(traces)

    def test_unknown_sut_exits_2(self, env):
        assert main(["simulate", "--config", str(env["config"]), "--sut", "ghost"]) == 2

    def test_missing_seed_exits_2(self, env):
        rewrite_config(env, lambda raw: raw["simulation"].pop("seed"))
        assert main(["simulate", "--config", str(env["config"]), "--sut", "mock"]) == 2

    def test_threshold_failure_exits_1(self, env, capsys):
        assert run_pipeline_through_graphs(env) == 0
        assert main(["simulate", "--config", str(env["config"]), "--sut", "mock"]) == 0
        rewrite_config(env, lambda raw: raw.update({"thresholds": {"min_precision": 0.999}}))
        assert main(["report", "--config", str(env["config"])]) == 1
        capsys.readouterr()


class TestFilterBatchStandalone:
    def test_decisions_document(self, env, capsys, motivating):
        capsys.readouterr()
        commit, *_ = motivating
        h3, h1 = commit.hunk("h3"), commit.hunk("h1")
        doc = {
            "last_edit": {
                "id": h3.id, "file": h3.file, "line_start": h3.line_start,
                "line_end": h3.line_end, "content_pre": h3.content_pre,
                "content_post": h3.content_post,
            },
            "batch": {
                "protocol_version": 1,
                "edits": [{
                    "file": h1.file, "line_start": 2, "line_end": 2,
                    "content_pre": h1.content_pre, "content_post": h1.content_post,
                    "source_rank": 0,
                }],
            },
        }
        doc_path = env["tmp"] / "batch.json"
        doc_path.write_text(json.dumps(doc))
        rc = main(["filter-batch", "--config", str(env["config"]), "--input", str(doc_path)])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["decisions"]) == 1
        assert payload["decisions"][0]["verdict"] == "kept"  # all-either mock


def test_config_missing_file_exits_2(tmp_path):
    assert main(["report", "--config", str(tmp_path / "none.json")]) == 2


def test_config_bad_json_exits_2(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert main(["report", "--config", str(p)]) == 2


class TestInferGraphEdgeCases:
    def test_single_hunk_commit_skipped_with_warning(self, env, capsys):
        from editflow.corpus.gitio import write_commit_cache
        from editflow.corpus.model import Commit, EditHunk

        single = Commit(
            commit_id="onehunk", parent_id="p", message="m", repo="r",
            hunks=(EditHunk(id="h1", file="a.py", line_start=1, line_end=1,
                            content_pre="a\n", content_post="b\n"),),
        )
        cache = env["out"] / "commits" / "onehunk.json"
        write_commit_cache(single, cache)
        rc = main(["infer-graph", "--config", str(env["config"]),
                   "--commits", str(cache), "--json"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "single hunk" in captured.err
        assert json.loads(captured.out)["skipped_single_hunk"] == 1

    def test_gateway_exhaustion_writes_partial_and_exits_3(self, env, fixture_repo, capsys):
        assert main(["extract", "--config", str(env["config"]), "--repo", "fixture"]) == 0
        capsys.readouterr()
        rewrite_config(env, lambda raw: raw.update({
            "gateway": {"provider": "http", "endpoint": "http://127.0.0.1:9",
                        "model": "m", "api_key": "k", "max_retries": 0},
        }))
        cache = sorted((env["out"] / "commits").glob("*.json"))[0]
        rc = main(["infer-graph", "--config", str(env["config"]),
                   "--commits", str(cache)])
        assert rc == 3
        commit_id = json.loads(cache.read_text())["commit_id"]
        assert (env["out"] / "graphs" / f"{commit_id}.partial.json").exists()
        capsys.readouterr()
