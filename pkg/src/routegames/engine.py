"""Round-based engine for the repeated game.

One round collects a simultaneous decision from every agent (each sees only
the completed history and its own random substream), evaluates the network,
and delivers the finished record back to the policies.  The network carries
no state across rounds.  Trials are reproducible: every draw comes from a
generator derived from (trial seed, agent index).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .llm import ChatClient, TranscriptStore
from .metrics import focal_series
from .network import ActionProfile, CongestionNetwork, payoffs, regret
from .policies import AgentSpec, DecisionContext, Policy, build_policy
from .representations import ReprAxes

GameHistory = list["RoundRecord"]


class RoundFailureError(RuntimeError):
    """A policy failed to produce a decision; carries agent and round."""

    def __init__(self, agent: int, round: int, cause: Exception) -> None:
        super().__init__(f"agent {agent} failed in round {round}: {cause}")
        self.agent = agent
        self.round = round
        self.cause = cause


@dataclass(frozen=True)
class RoundRecord:
    """The joint outcome of one round: choices, route counts, payoffs, regrets."""

    round: int
    choices: ActionProfile
    distribution: dict[str, int]
    payoffs: tuple[int, ...]
    regrets: tuple[int, ...]


@dataclass(frozen=True)
class TrialConfig:
    network: CongestionNetwork
    agent_spec: AgentSpec
    n_agents: int = 18
    rounds: int = 40
    representation: ReprAxes | None = None
    seed: int = 0
    trial_id: str = "trial-000"

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if self.n_agents < 2:
            raise ValueError(f"need at least 2 agents, got {self.n_agents}")
        if self.agent_spec.kind == "llm" and self.representation is None:
            raise ValueError("llm trials require a representation")


@dataclass(frozen=True)
class TrialResult:
    config: TrialConfig
    history: tuple[RoundRecord, ...]
    switch_counts: tuple[int, ...]
    focal_counts: tuple[int, ...] | None
    transcript: TranscriptStore | None = None


@dataclass(frozen=True)
class TrialFailure:
    """A trial that aborted; kept in experiment results, never dropped."""

    trial_id: str
    seed: int
    error: str
    round: int | None = None
    agent: int | None = None


def agent_rng(seed: int, agent: int) -> np.random.Generator:
    """Private substream for one agent: SeedSequence mixes the 64-bit trial
    seed with the agent index, so adding agents never perturbs existing ones."""
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, agent]))


def make_agent_rngs(seed: int, n_agents: int) -> list[np.random.Generator]:
    return [agent_rng(seed, agent) for agent in range(n_agents)]


def run_round(
    network: CongestionNetwork,
    policies: Sequence[Policy],
    history: Sequence[RoundRecord],
    rngs: Sequence[np.random.Generator],
    axes: ReprAxes | None = None,
) -> RoundRecord:
    """Play one simultaneous round.

    All decisions commit before any payoff computation (a strict barrier);
    policies then receive the finished record via ``observe``.
    """
    round_index = len(history) + 1
    decisions: list[int] = []
    for agent, policy in enumerate(policies):
        ctx = DecisionContext(
            agent=agent,
            round=round_index,
            network=network,
            history=history,
            rng=rngs[agent],
            axes=axes,
        )
        try:
            decision = policy.decide(ctx)
        except Exception as exc:
            raise RoundFailureError(agent, round_index, exc) from exc
        if not 0 <= decision < len(network.routes):
            raise RoundFailureError(
                agent, round_index, ValueError(f"route index {decision} out of range")
            )
        decisions.append(decision)

    profile = ActionProfile(tuple(decisions))
    counts = profile.route_counts(network)
    record = RoundRecord(
        round=round_index,
        choices=profile,
        distribution={name: count for name, count in zip(network.route_names, counts)},
        payoffs=payoffs(network, profile),
        regrets=tuple(regret(network, profile, agent) for agent in range(profile.n)),
    )
    for policy in policies:
        policy.observe(record)
    return record


def run_trial(
    config: TrialConfig,
    *,
    backend=None,
    on_record: Callable[[RoundRecord], None] | None = None,
) -> TrialResult:
    """Play one full trial of ``config.rounds`` rounds.

    LLM trials route every completion through a recording transcript; the
    ``backend`` argument supplies the live/scripted/replay transport.
    """
    transcript: TranscriptStore | None = None
    client: ChatClient | None = None
    if config.agent_spec.kind == "llm":
        if backend is None:
            raise ValueError("llm trials require a backend")
        transcript = TranscriptStore()
        client = ChatClient(backend, transcript)

    policies = [
        build_policy(
            config.agent_spec,
            config.network,
            agent,
            axes=config.representation,
            client=client,
            trial_id=config.trial_id,
            n_agents=config.n_agents,
            rounds=config.rounds,
        )
        for agent in range(config.n_agents)
    ]
    rngs = make_agent_rngs(config.seed, config.n_agents)

    history: GameHistory = []
    for _ in range(config.rounds):
        record = run_round(config.network, policies, history, rngs, axes=config.representation)
        history.append(record)
        if on_record is not None:
            on_record(record)

    return TrialResult(
        config=config,
        history=tuple(history),
        switch_counts=tuple(_switches_per_agent(history, config.n_agents)),
        focal_counts=focal_series(config.network, history),
        transcript=transcript,
    )


def _switches_per_agent(history: Sequence[RoundRecord], n_agents: int) -> list[int]:
    counts = [0] * n_agents
    for previous, current in zip(history, history[1:]):
        for agent in range(n_agents):
            if current.choices.choices[agent] != previous.choices.choices[agent]:
                counts[agent] += 1
    return counts


def run_trial_safe(
    config: TrialConfig,
    *,
    backend=None,
    on_record: Callable[[RoundRecord], None] | None = None,
) -> TrialResult | TrialFailure:
    """run_trial, but failures become TrialFailure values instead of raising."""
    try:
        return run_trial(config, backend=backend, on_record=on_record)
    except RoundFailureError as exc:
        return TrialFailure(
            trial_id=config.trial_id,
            seed=config.seed,
            error=str(exc),
            round=exc.round,
            agent=exc.agent,
        )
    except Exception as exc:
        return TrialFailure(trial_id=config.trial_id, seed=config.seed, error=str(exc))


def run_experiment(
    config: TrialConfig,
    trials: int,
    seed_base: int,
    *,
    backend=None,
    workers: int = 1,
    on_record: Callable[[str, RoundRecord], None] | None = None,
) -> list[TrialResult | TrialFailure]:
    """Run ``trials`` independent trials; trial i uses seed ``seed_base + i``.

    Results are order-stable regardless of worker count, and a failed trial
    is recorded as a ``TrialFailure`` rather than silently dropped.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def one(index: int) -> TrialResult | TrialFailure:
        trial_config = replace(config, seed=seed_base + index, trial_id=f"trial-{index:03d}")
        callback = None
        if on_record is not None:
            callback = lambda record: on_record(trial_config.trial_id, record)
        return run_trial_safe(trial_config, backend=backend, on_record=callback)

    if workers <= 1:
        return [one(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(trials)))
