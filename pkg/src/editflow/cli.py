"""Command-line surface: extract -> infer-graph -> tune -> simulate -> report.

Exit codes: 0 success, 1 acceptance-threshold failure, 2 usage/config error,
3 external-dependency failure. Every command takes --config and --json and is
idempotent over existing outputs unless --force is given.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
from pathlib import Path

from editflow.config import ConfigError, HarnessConfig, build_gateway, load_config
from editflow.corpus.gitio import (
    extract_commit,
    list_commits,
    load_commit_cache,
    write_commit_cache,
)
from editflow.corpus.model import Commit, commit_summary, passes_filter
from editflow.errors import (
    CheckoutFailedError,
    EditFlowError,
    EmptyCommitError,
    GatewayError,
    MergeCommitError,
    MissingParentError,
)
from editflow.filtering import FlowFilter, RecyclePool, filter_and_rank
from editflow.flow.graph import (
    export_graph,
    graph_from_dict,
    load_annotation,
    write_annotation,
)
from editflow.metrics import ReportCell, render_report, write_report
from editflow.recovery.dataset import LabeledDataset, samples_from_annotation
from editflow.recovery.infer import PartialInferenceError, infer_graph
from editflow.recovery.prompts import (
    PromptCandidate,
    few_shot_prompt,
    hand_crafted_prompt,
    load_prompt_asset,
    save_prompt_asset,
    zero_shot_prompt,
)
from editflow.recovery.tuning import tune_prompt
from editflow.twin.protocol import batch_from_dict
from editflow.twin.simulate import SimConfig, load_trace, simulate, write_trace
from editflow.twin.suts import MockSut, NoiseProfile, ReplaySut, SubprocessSut, load_replay_script

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2
EXIT_EXTERNAL = 3


def _emit(args, payload: dict, text: str | None = None) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif text is not None:
        print(text)


def _active_prompt(cfg: HarnessConfig, override: str | None) -> PromptCandidate:
    if override:
        if override == "zero-shot":
            return zero_shot_prompt()
        if override == "few-shot":
            return few_shot_prompt()
        if override == "hand-crafted":
            return hand_crafted_prompt()
        return load_prompt_asset(override)
    if cfg.prompt_asset:
        return load_prompt_asset(cfg.prompt_asset)
    strategy = cfg.prompt_strategy or "zero-shot"
    return {"zero-shot": zero_shot_prompt, "few-shot": few_shot_prompt,
            "hand-crafted": hand_crafted_prompt}[strategy]()


def _derived_seed(base: int, commit_id: str) -> int:
    digest = hashlib.md5(f"{base}:{commit_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# --- extract -------------------------------------------------------------------

def cmd_extract(args) -> int:
    cfg = load_config(args.config)
    if args.repo not in cfg.repos:
        print(f"error: unknown repo {args.repo!r}", file=sys.stderr)
        return EXIT_USAGE
    repo = cfg.repos[args.repo]
    out_dir = cfg.output_dir / "commits"
    try:
        ids = list_commits(repo, args.rev_range, limit=args.limit)
    except CheckoutFailedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    accepted, rejected, skipped = [], [], []
    for commit_id in ids:
        try:
            commit = extract_commit(repo, commit_id)
        except (MergeCommitError, MissingParentError, EmptyCommitError) as exc:
            skipped.append({"commit": commit_id, "reason": type(exc).__name__})
            continue
        if passes_filter(commit, cfg.commit_filter):
            path = out_dir / f"{commit.commit_id}.json"
            if path.exists() and not args.force:
                accepted.append(commit_summary(commit) | {"cached": True})
                continue
            write_commit_cache(commit, path)
            accepted.append(commit_summary(commit) | {"cached": False})
        else:
            rejected.append(commit.commit_id)

    payload = {
        "accepted": len(accepted),
        "rejected": len(rejected),
        "skipped": len(skipped),
        "commits": accepted,
    }
    _emit(
        args,
        payload,
        f"accepted {len(accepted)}, rejected {len(rejected)}, skipped {len(skipped)} "
        f"-> {out_dir}",
    )
    return EXIT_OK


# --- infer-graph ---------------------------------------------------------------

def _commit_paths(cfg: HarnessConfig, pattern: str | None) -> list[Path]:
    if pattern:
        import glob as globmod

        return [Path(p) for p in sorted(globmod.glob(pattern))]
    return sorted((cfg.output_dir / "commits").glob("*.json"))


def cmd_infer_graph(args) -> int:
    cfg = load_config(args.config)
    prompt = _active_prompt(cfg, args.prompt)
    gw = build_gateway(cfg)
    graph_dir = cfg.output_dir / "graphs"
    done, skipped_small, failed = 0, 0, 0
    for path in _commit_paths(cfg, args.commits):
        commit = load_commit_cache(path)
        out_path = graph_dir / f"{commit.commit_id}.json"
        partial_path = graph_dir / f"{commit.commit_id}.partial.json"
        if out_path.exists() and not args.force:
            done += 1
            continue
        if len(commit.hunks) < 2:
            print(f"warning: {commit.commit_id} has a single hunk, skipped", file=sys.stderr)
            skipped_small += 1
            continue
        resume = None
        if partial_path.exists():
            resume = load_annotation(partial_path)
        try:
            graph, labels = infer_graph(prompt, commit, gw, resume=resume)
        except PartialInferenceError as exc:
            write_annotation(exc.labels, commit.repo, partial_path)
            print(f"error: {exc}; partial labels saved", file=sys.stderr)
            failed += 1
            continue
        write_annotation(labels, commit.repo, graph_dir / f"{commit.commit_id}.labels.json")
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(
            json.dumps(
                {"commit_id": commit.commit_id, **export_graph(graph)},
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
        partial_path.unlink(missing_ok=True)
        done += 1
    payload = {"graphs": done, "skipped_single_hunk": skipped_small, "failed": failed}
    _emit(args, payload, f"graphs {done}, skipped {skipped_small}, failed {failed}")
    return EXIT_EXTERNAL if failed else EXIT_OK


# --- tune ----------------------------------------------------------------------

def cmd_tune(args) -> int:
    cfg = load_config(args.config)
    gw = build_gateway(cfg)
    samples = []
    for ann_path in sorted(Path(p) for p in args.annotations):
        labels = load_annotation(ann_path)
        commit = load_commit_cache(Path(args.commit_dir or (cfg.output_dir / "commits")) / f"{labels.commit_id}.json")
        samples.extend(samples_from_annotation(commit, labels))
    if not samples:
        print("error: no training samples", file=sys.stderr)
        return EXIT_USAGE
    d_tr = LabeledDataset(samples=tuple(samples))
    checkpoint = cfg.output_dir / "tuner_checkpoint.json"
    try:
        result = tune_prompt(d_tr, cfg.tuner, gw, checkpoint_path=checkpoint, resume=args.resume)
    except GatewayError as exc:
        print(f"error: gateway failure: {exc}; checkpoint saved", file=sys.stderr)
        return EXIT_EXTERNAL
    save_prompt_asset(result.best, cfg.output_dir / "tuned_prompt.txt")
    payload = {
        "best_accuracy": result.best.accuracy_on_train,
        "epochs_run": result.epochs_run,
        "terminated_early": result.terminated_early,
        "candidates": len(result.candidates),
        "prompt_path": str(cfg.output_dir / "tuned_prompt.txt"),
    }
    _emit(
        args,
        payload,
        f"best accuracy {result.best.accuracy_on_train:.4f} after {result.epochs_run} epochs "
        f"({len(result.candidates)} candidates) -> {payload['prompt_path']}",
    )
    return EXIT_OK


# --- simulate --------------------------------------------------------------------

def _build_sut(cfg: HarnessConfig, name: str, commit: Commit, graph, seed: int):
    settings = cfg.suts[name]
    if settings.kind == "mock":
        noise = settings.noise
        return MockSut(
            graph=graph,
            commit=commit,
            noise=NoiseProfile(
                break_rate=noise.get("break_rate", 0.0),
                jump_rate=noise.get("jump_rate", 0.0),
                revert_rate=noise.get("revert_rate", 0.0),
            ),
            seed=seed,
            emissions_per_query=settings.emissions_per_query,
            sut_id=name,
        )
    if settings.kind == "subprocess":
        return SubprocessSut(command=settings.command, timeout=settings.timeout, sut_id=name)
    if settings.script_dir is not None:
        sut = load_replay_script(settings.script_dir / f"{commit.commit_id}.json")
    else:
        sut = load_replay_script(settings.script)
    return ReplaySut(batches=sut.batches, sut_id=name)


def _simulate_one(cfg: HarnessConfig, sut_name: str, commit: Commit, graph, with_filter: bool):
    seed = _derived_seed(cfg.simulation.seed, commit.commit_id)
    sut = _build_sut(cfg, sut_name, commit, graph, seed)
    flow_filter = None
    if with_filter:
        flow_filter = FlowFilter(prompt=_active_prompt(cfg, None), gateway=build_gateway(cfg))
    sim_cfg = SimConfig(
        seed=seed, with_filter=with_filter, batch_cap=cfg.simulation.batch_cap, sut_id=sut_name
    )
    return simulate(commit, graph, sut, sim_cfg, flow_filter)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.sut not in cfg.suts:
        print(f"error: unknown SUT {args.sut!r}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.simulation.seed is None:
        print("error: simulation.seed is mandatory", file=sys.stderr)
        return EXIT_USAGE
    with_filter = args.with_filter or cfg.simulation.with_filter
    config_name = "with_filter" if with_filter else "original"
    trace_dir = cfg.output_dir / "traces" / args.sut / config_name
    graph_dir = cfg.output_dir / "graphs"

    jobs = []
    for path in _commit_paths(cfg, args.commits):
        commit = load_commit_cache(path)
        graph_path = graph_dir / f"{commit.commit_id}.json"
        if not graph_path.exists():
            print(f"warning: no graph for {commit.commit_id}, skipped", file=sys.stderr)
            continue
        graph = graph_from_dict(json.loads(graph_path.read_text()))
        out_path = trace_dir / f"{commit.commit_id}.json"
        if out_path.exists() and not args.force:
            continue
        jobs.append((commit, graph, out_path))

    workers = cfg.simulation.workers or os.cpu_count() or 1
    failures = 0
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(_simulate_one, cfg, args.sut, commit, graph, with_filter): out_path
            for commit, graph, out_path in jobs
        }
        for fut, out_path in futures.items():
            try:
                trace = fut.result()
            except EditFlowError as exc:
                print(f"error: {out_path.stem}: {exc}", file=sys.stderr)
                failures += 1
                continue
            write_trace(trace, out_path)

    payload = {"traces": len(jobs) - failures, "failures": failures, "dir": str(trace_dir)}
    _emit(args, payload, f"wrote {payload['traces']} traces to {trace_dir}")
    return EXIT_EXTERNAL if failures else EXIT_OK


# --- report ----------------------------------------------------------------------

def cmd_report(args) -> int:
    cfg = load_config(args.config)
    trace_root = cfg.output_dir / "traces"
    cells: dict[tuple[str, str], list] = {}
    for path in sorted(trace_root.glob("*/*/*.json")):
        trace = load_trace(path)
        key = (trace.config.get("sut_id", path.parent.parent.name),
               "with_filter" if trace.config.get("with_filter") else "original")
        cells.setdefault(key, []).append(trace)
    commits = {}
    for path in (cfg.output_dir / "commits").glob("*.json"):
        commit = load_commit_cache(path)
        commits[commit.commit_id] = commit
    report = render_report(
        [
            ReportCell(sut_id=sut, config_name=config, traces=tuple(traces))
            for (sut, config), traces in sorted(cells.items())
        ],
        commits,
        thresholds=cfg.thresholds or None,
    )
    write_report(report, cfg.output_dir / "report.json")
    _emit(args, report["json"], report["text"])
    if not args.json:
        print(f"report -> {cfg.output_dir / 'report.json'}")
    return EXIT_OK if report["ok"] else EXIT_THRESHOLD


# --- filter-batch (standalone wrapper mode) ---------------------------------------

def cmd_filter_batch(args) -> int:
    cfg = load_config(args.config)
    doc = json.loads(Path(args.input).read_text())
    from editflow.corpus.model import EditHunk

    last = doc["last_edit"]
    last_edit = EditHunk(
        id=last.get("id", "h_n"),
        file=last["file"],
        line_start=last["line_start"],
        line_end=last["line_end"],
        content_pre=last.get("content_pre", ""),
        content_post=last.get("content_post", ""),
        structural_path=last.get("structural_path", ""),
    )
    batch = batch_from_dict(doc["batch"])
    outcome = filter_and_rank(
        last_edit, batch, RecyclePool(), _active_prompt(cfg, args.prompt), build_gateway(cfg)
    )
    payload = {
        "kept": [d.to_dict() for d in outcome.decisions if d.verdict == "kept"],
        "decisions": [d.to_dict() for d in outcome.decisions],
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


# --- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="editflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the JSON config file")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")

    p = sub.add_parser("extract", help="mine commits into cache files")
    common(p)
    p.add_argument("--repo", required=True, help="repo name from the config")
    p.add_argument("--rev-range", default="HEAD")
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("infer-graph", help="infer order labels and flow graphs")
    common(p)
    p.add_argument("--commits", default=None, help="glob of commit cache files")
    p.add_argument("--prompt", default=None, help="prompt asset path or strategy name")
    p.set_defaults(func=cmd_infer_graph)

    p = sub.add_parser("tune", help="auto-tune the order-recovery prompt")
    common(p)
    p.add_argument("--annotations", nargs="+", required=True, help="annotation files")
    p.add_argument("--commit-dir", default=None)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("simulate", help="run the digital twin over cached commits")
    common(p)
    p.add_argument("--sut", required=True, help="SUT name from the config")
    p.add_argument("--with-filter", action="store_true")
    p.add_argument("--commits", default=None, help="glob of commit cache files")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="aggregate traces into the report")
    common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("filter-batch", help="filter one batch document standalone")
    common(p)
    p.add_argument("--input", required=True, help="JSON doc with last_edit and batch")
    p.add_argument("--prompt", default=None)
    p.set_defaults(func=cmd_filter_batch)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GatewayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL


if __name__ == "__main__":
    sys.exit(main())
