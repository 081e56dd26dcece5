"""Declarative experiment configuration.

Experiments are described in a flat, comment-friendly TOML document; every
key can also be overridden from the command line.  An optional ``[network]``
table defines a non-canonical game inline for testing.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from typing import Any, Mapping

if sys.version_info >= (3, 11):  # pragma: no cover
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .engine import TrialConfig
from .llm import (
    DEFAULT_ENDPOINT,
    DEFAULT_MODEL,
    LiveBackend,
    RateLimiter,
    ReplayBackend,
    ScriptedBackend,
    TranscriptStore,
)
from .network import CongestionNetwork, EdgeCost, Route, game_a, game_b
from .policies import POLICY_KINDS, AgentSpec
from .representations import ALL_REPRESENTATION_CODES, ReprAxes


class ConfigError(ValueError):
    """A configuration document or override is invalid; message names the field."""


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "live"  # live | replay | scripted
    endpoint: str = DEFAULT_ENDPOINT
    model: str = DEFAULT_MODEL
    temperature: float = 1.0
    rate_limit: float | None = None
    retry_attempts: int = 5
    backoff_base: float = 1.0
    timeout: float = 60.0
    credential_env: str = "OPENAI_API_KEY"
    replay_path: str | None = None
    responses: tuple[str, ...] | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    game: str = "A"
    agent: str = "mwu"
    representation: str | None = None
    learning_rate: float = 0.75
    exploration_rate: float = 0.75
    n: int = 18
    rounds: int = 40
    trials: int = 1
    seed: int = 0
    out: str = "runs/experiment"
    workers: int = 1
    backend: BackendConfig | None = None
    network: Mapping[str, Any] | None = None

    @property
    def label(self) -> str:
        if self.agent == "llm" and self.representation:
            return self.representation
        return {"mwu": "MWU", "exp3": "EXP3"}.get(self.agent, self.agent)


_TOP_LEVEL_KEYS = {
    "game",
    "agent",
    "representation",
    "learning_rate",
    "exploration_rate",
    "n",
    "rounds",
    "trials",
    "seed",
    "out",
    "workers",
    "backend",
    "network",
}
_BACKEND_KEYS = {
    "kind",
    "endpoint",
    "model",
    "temperature",
    "rate_limit",
    "retry_attempts",
    "backoff_base",
    "timeout",
    "credential_env",
    "replay_path",
    "responses",
}


def _expect(data: Mapping[str, Any], key: str, types, default):
    value = data.get(key, default)
    if value is not None and not isinstance(value, types):
        raise ConfigError(
            f"field {key!r}: expected {getattr(types, '__name__', types)}, "
            f"got {type(value).__name__}"
        )
    return value


def config_from_dict(data: Mapping[str, Any]) -> ExperimentConfig:
    unknown = set(data) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    backend = None
    if "backend" in data:
        raw = data["backend"]
        if not isinstance(raw, Mapping):
            raise ConfigError("field 'backend': expected a table")
        unknown = set(raw) - _BACKEND_KEYS
        if unknown:
            raise ConfigError(f"unknown backend field(s): {', '.join(sorted(unknown))}")
        responses = raw.get("responses")
        backend = BackendConfig(
            kind=_expect(raw, "kind", str, "live"),
            endpoint=_expect(raw, "endpoint", str, DEFAULT_ENDPOINT),
            model=_expect(raw, "model", str, DEFAULT_MODEL),
            temperature=float(_expect(raw, "temperature", (int, float), 1.0)),
            rate_limit=raw.get("rate_limit"),
            retry_attempts=_expect(raw, "retry_attempts", int, 5),
            backoff_base=float(_expect(raw, "backoff_base", (int, float), 1.0)),
            timeout=float(_expect(raw, "timeout", (int, float), 60.0)),
            credential_env=_expect(raw, "credential_env", str, "OPENAI_API_KEY"),
            replay_path=_expect(raw, "replay_path", str, None),
            responses=tuple(responses) if responses is not None else None,
        )
        if backend.kind not in ("live", "replay", "scripted"):
            raise ConfigError(f"field 'backend.kind': unknown kind {backend.kind!r}")

    config = ExperimentConfig(
        game=_expect(data, "game", str, "A"),
        agent=_expect(data, "agent", str, "mwu"),
        representation=_expect(data, "representation", str, None),
        learning_rate=float(_expect(data, "learning_rate", (int, float), 0.75)),
        exploration_rate=float(_expect(data, "exploration_rate", (int, float), 0.75)),
        n=_expect(data, "n", int, 18),
        rounds=_expect(data, "rounds", int, 40),
        trials=_expect(data, "trials", int, 1),
        seed=_expect(data, "seed", int, 0),
        out=_expect(data, "out", str, "runs/experiment"),
        workers=_expect(data, "workers", int, 1),
        backend=backend,
        network=data.get("network"),
    )
    validate_config(config)
    return config


def validate_config(config: ExperimentConfig) -> None:
    if config.agent not in POLICY_KINDS:
        raise ConfigError(f"field 'agent': unknown kind {config.agent!r}")
    if config.representation is not None and config.representation not in ALL_REPRESENTATION_CODES:
        raise ConfigError(
            f"field 'representation': {config.representation!r} is not one of "
            f"{', '.join(ALL_REPRESENTATION_CODES)}"
        )
    if config.agent == "llm" and config.representation is None:
        raise ConfigError("field 'representation': required for llm agents")
    if config.trials < 1:
        raise ConfigError(f"field 'trials': must be >= 1, got {config.trials}")
    if config.rounds < 1:
        raise ConfigError(f"field 'rounds': must be >= 1, got {config.rounds}")
    if config.n < 2:
        raise ConfigError(f"field 'n': must be >= 2, got {config.n}")
    if config.network is None and config.game not in ("A", "B"):
        raise ConfigError(f"field 'game': expected 'A' or 'B', got {config.game!r}")
    if config.agent == "llm" and config.backend is None:
        raise ConfigError("field 'backend': required for llm agents")


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_to_dict(config: ExperimentConfig) -> dict[str, Any]:
    """JSON-ready echo of the config for RunLog headers; round-trips through
    config_from_dict.  Execution-environment fields (output directory,
    worker count) are deliberately not part of the echo, so identical
    experiments produce identical headers wherever they run."""
    data: dict[str, Any] = {
        "game": config.game,
        "agent": config.agent,
        "learning_rate": config.learning_rate,
        "exploration_rate": config.exploration_rate,
        "n": config.n,
        "rounds": config.rounds,
        "trials": config.trials,
        "seed": config.seed,
    }
    if config.representation is not None:
        data["representation"] = config.representation
    if config.backend is not None:
        backend = {k: v for k, v in config.backend.__dict__.items() if v is not None}
        if "responses" in backend:
            backend["responses"] = list(backend["responses"])
        data["backend"] = backend
    if config.network is not None:
        data["network"] = config.network
    return data


def apply_overrides(config: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    """Apply non-None CLI overrides; 'backend' switches the backend kind."""
    backend_kind = overrides.pop("backend", None)
    updates = {k: v for k, v in overrides.items() if v is not None}
    config = replace(config, **updates)
    if backend_kind is not None:
        base = config.backend or BackendConfig()
        config = replace(config, backend=replace(base, kind=backend_kind))
    validate_config(config)
    return config


def build_network(config: ExperimentConfig) -> CongestionNetwork:
    if config.network is not None:
        return network_from_dict(config.network)
    return game_a() if config.game == "A" else game_b()


def network_from_dict(data: Mapping[str, Any]) -> CongestionNetwork:
    """Inline network table: nodes, directed edges with affine costs, routes
    as node sequences."""
    try:
        nodes = frozenset(data["nodes"])
        edges = {
            (e["tail"], e["head"]): EdgeCost(int(e["slope"]), int(e["intercept"]))
            for e in data["edges"]
        }
        routes = tuple(Route.from_nodes(list(r)) for r in data["routes"])
        return CongestionNetwork(
            name=data.get("name", "custom"),
            nodes=nodes,
            edges=edges,
            routes=routes,
            endowment=int(data.get("endowment", 400)),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"field 'network': malformed definition ({exc})") from exc


def agent_spec(config: ExperimentConfig) -> AgentSpec:
    backend = config.backend or BackendConfig()
    return AgentSpec(
        kind=config.agent,
        learning_rate=config.learning_rate,
        exploration_rate=config.exploration_rate,
        model=backend.model,
        temperature=backend.temperature,
    )


def representation_axes(config: ExperimentConfig) -> ReprAxes | None:
    if config.representation is None:
        return None
    return ReprAxes.parse(config.representation)


def trial_template(config: ExperimentConfig) -> TrialConfig:
    return TrialConfig(
        network=build_network(config),
        agent_spec=agent_spec(config),
        n_agents=config.n,
        rounds=config.rounds,
        representation=representation_axes(config),
        seed=config.seed,
        trial_id="trial-000",
    )


def build_backend(config: ExperimentConfig):
    """Instantiate the transport named by the backend section; None for
    algorithmic agents."""
    if config.agent != "llm":
        return None
    backend = config.backend
    if backend is None:
        raise ConfigError("field 'backend': required for llm agents")
    if backend.kind == "scripted":
        if backend.responses is None:
            raise ConfigError("field 'backend.responses': required for scripted backends")
        return ScriptedBackend(backend.responses)
    if backend.kind == "replay":
        if backend.replay_path is None:
            raise ConfigError("field 'backend.replay_path': required for replay backends")
        return ReplayBackend(load_transcripts(backend.replay_path))
    limiter = RateLimiter(backend.rate_limit) if backend.rate_limit else None
    return LiveBackend(
        endpoint=backend.endpoint,
        credential_env=backend.credential_env,
        rate_limiter=limiter,
        max_attempts=backend.retry_attempts,
        backoff_base=backend.backoff_base,
        timeout=backend.timeout,
    )


def load_transcripts(path) -> TranscriptStore:
    """Load a transcript file, or merge every *.jsonl file in a directory
    (entries are keyed by trial, so merging is lossless)."""
    from pathlib import Path

    target = Path(path)
    if target.is_dir():
        store = TranscriptStore()
        for part in sorted(target.glob("*.jsonl")):
            for entry in TranscriptStore.load(part).entries():
                store.add(entry)
        return store
    return TranscriptStore.load(target)
