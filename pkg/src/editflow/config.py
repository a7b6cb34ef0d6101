"""Single-file JSON configuration for the whole harness.

Everything a run needs lives in one document so results are reproducible
from one artifact; the only environment override is the EDITFLOW_API_KEY
credential.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from editflow.corpus.model import CommitFilter
from editflow.errors import EditFlowError
from editflow.gateway.core import Gateway
from editflow.gateway.http import HttpProvider
from editflow.gateway.mock import MockProvider, load_mock_script
from editflow.gateway.types import PriceTable
from editflow.recovery.tuning import TunerConfig


class ConfigError(EditFlowError):
    """Configuration file missing, malformed, or referencing absent paths."""


@dataclass(frozen=True)
class GatewaySettings:
    provider: str = "mock"  # "mock" | "http"
    endpoint: str | None = None
    model: str = "mock-model"
    price_in: float = 0.0
    price_out: float = 0.0
    rate_limit_per_minute: int | None = None
    max_retries: int = 2
    mock_script: Path | None = None
    api_key: str | None = None


@dataclass(frozen=True)
class SimulationSettings:
    seed: int | None = None
    with_filter: bool = False
    batch_cap: int = 10
    workers: int | None = None


@dataclass(frozen=True)
class SutSettings:
    kind: str  # "mock" | "subprocess" | "replay"
    command: str | None = None
    timeout: float = 60.0
    script: Path | None = None
    script_dir: Path | None = None
    noise: dict = field(default_factory=dict)
    emissions_per_query: int = 3


@dataclass(frozen=True)
class HarnessConfig:
    source: Path
    output_dir: Path
    repos: dict[str, Path] = field(default_factory=dict)
    commits: tuple[dict, ...] = ()
    commit_filter: CommitFilter = field(default_factory=CommitFilter)
    gateway: GatewaySettings = field(default_factory=GatewaySettings)
    tuner: TunerConfig = field(default_factory=TunerConfig)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    suts: dict[str, SutSettings] = field(default_factory=dict)
    prompt_asset: Path | None = None
    prompt_strategy: str | None = None
    thresholds: dict = field(default_factory=dict)


def _require_path(raw: str, base: Path, what: str) -> Path:
    p = Path(raw)
    if not p.is_absolute():
        p = (base / p).resolve()
    if not p.exists():
        raise ConfigError(f"{what} does not exist: {p}")
    return p


def load_config(path: str | Path) -> HarnessConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except ValueError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    base = path.parent

    out_raw = data.get("output_dir", "out")
    output_dir = Path(out_raw)
    if not output_dir.is_absolute():
        output_dir = (base / output_dir).resolve()

    repos = {
        name: _require_path(raw, base, f"repo {name!r}")
        for name, raw in data.get("repos", {}).items()
    }

    cf = data.get("commit_filter", {})
    try:
        commit_filter = CommitFilter(
            min_hunks=cf.get("min_hunks", 5),
            max_hunks=cf.get("max_hunks", 10),
            min_files=cf.get("min_files", 2),
            require_ascii=cf.get("require_ascii", True),
            reject_merges=cf.get("reject_merges", True),
            reject_renames=cf.get("reject_renames", True),
        )
    except ValueError as exc:
        raise ConfigError(f"commit_filter: {exc}") from exc

    gw = data.get("gateway", {})
    provider = gw.get("provider", "mock")
    if provider not in ("mock", "http"):
        raise ConfigError(f"gateway.provider must be mock or http, got {provider!r}")
    if provider == "http" and not gw.get("endpoint"):
        raise ConfigError("gateway.provider=http requires gateway.endpoint")
    mock_script = gw.get("mock_script")
    gateway = GatewaySettings(
        provider=provider,
        endpoint=gw.get("endpoint"),
        model=gw.get("model", "mock-model"),
        price_in=gw.get("price_in", 0.0),
        price_out=gw.get("price_out", 0.0),
        rate_limit_per_minute=gw.get("rate_limit_per_minute"),
        max_retries=gw.get("max_retries", 2),
        mock_script=_require_path(mock_script, base, "gateway.mock_script") if mock_script else None,
        api_key=gw.get("api_key"),
    )

    tu = data.get("tuner", {})
    try:
        tuner = TunerConfig(
            epochs=tu.get("epochs", 5),
            batch_size=tu.get("batch_size", 32),
            temperature=tu.get("temperature", 0.7),
            max_output_tokens=tu.get("max_output_tokens", 4096),
            keep_global_best=tu.get("keep_global_best", True),
            rng_seed=tu.get("rng_seed", 0),
        )
    except ValueError as exc:
        raise ConfigError(f"tuner: {exc}") from exc

    sim = data.get("simulation", {})
    simulation = SimulationSettings(
        seed=sim.get("seed"),
        with_filter=sim.get("with_filter", False),
        batch_cap=sim.get("batch_cap", 10),
        workers=sim.get("workers"),
    )

    suts: dict[str, SutSettings] = {}
    for name, raw in data.get("suts", {}).items():
        kind = raw.get("kind")
        if kind not in ("mock", "subprocess", "replay"):
            raise ConfigError(f"sut {name!r}: kind must be mock, subprocess or replay")
        if kind == "subprocess" and not raw.get("command"):
            raise ConfigError(f"sut {name!r}: subprocess kind requires command")
        script = raw.get("script")
        script_dir = raw.get("script_dir")
        if kind == "replay" and not (script or script_dir):
            raise ConfigError(f"sut {name!r}: replay kind requires script or script_dir")
        suts[name] = SutSettings(
            kind=kind,
            command=raw.get("command"),
            timeout=raw.get("timeout", 60.0),
            script=_require_path(script, base, f"sut {name!r} script") if script else None,
            script_dir=_require_path(script_dir, base, f"sut {name!r} script_dir")
            if script_dir
            else None,
            noise=raw.get("noise", {}),
            emissions_per_query=raw.get("emissions_per_query", 3),
        )

    prompts = data.get("prompts", {})
    asset = prompts.get("asset")
    strategy = prompts.get("strategy")
    if strategy is not None and strategy not in ("zero-shot", "few-shot", "hand-crafted"):
        raise ConfigError(f"prompts.strategy {strategy!r} unknown")

    return HarnessConfig(
        source=path,
        output_dir=output_dir,
        repos=repos,
        commits=tuple(data.get("commits", ())),
        commit_filter=commit_filter,
        gateway=gateway,
        tuner=tuner,
        simulation=simulation,
        suts=suts,
        prompt_asset=_require_path(asset, base, "prompts.asset") if asset else None,
        prompt_strategy=strategy,
        thresholds=data.get("thresholds", {}),
    )


def build_gateway(cfg: HarnessConfig) -> Gateway:
    gw = cfg.gateway
    price = PriceTable(model_name=gw.model, price_in=gw.price_in, price_out=gw.price_out)
    if gw.provider == "mock":
        provider = load_mock_script(gw.mock_script) if gw.mock_script else MockProvider()
        return Gateway(
            provider=provider,
            price_table=price,
            max_retries=gw.max_retries,
            rate_limit_per_minute=gw.rate_limit_per_minute,
            deterministic_timing=True,
        )
    provider = HttpProvider(endpoint=gw.endpoint, model=gw.model, api_key=gw.api_key)
    return Gateway(
        provider=provider,
        price_table=price,
        max_retries=gw.max_retries,
        rate_limit_per_minute=gw.rate_limit_per_minute,
    )


__all__ = [
    "ConfigError",
    "GatewaySettings",
    "HarnessConfig",
    "SimulationSettings",
    "SutSettings",
    "build_gateway",
    "load_config",
]
