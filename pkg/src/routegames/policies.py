"""Decision policies: uniform random, myopic best response, multiplicative
weights (full feedback), EXP3 (bandit feedback), and the LLM-backed policy.

All weight-based updates work on losses in [0, 1]; game payoffs are mapped
through ``loss_from_payoff`` (loss = 1 - payoff/endowment).  Policies update
internal state only in ``observe``, after the round's results are fixed,
never inside ``decide``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .llm import (
    ChatClient,
    CompletionRequest,
    DEFAULT_MODEL,
    InvalidRouteError,
    RouteParseError,
    parse_route,
    turns_to_messages,
)
from .network import CongestionNetwork, counterfactual_payoffs
from .representations import PromptStyle, ReprAxes, render_context

if TYPE_CHECKING:  # pragma: no cover
    from .engine import RoundRecord

POLICY_KINDS = ("random", "best-response", "mwu", "exp3", "llm")


@dataclass(frozen=True)
class AgentSpec:
    """Policy kind plus its hyperparameters, as they appear in config files."""

    kind: str
    learning_rate: float = 0.75
    exploration_rate: float = 0.75
    model: str = DEFAULT_MODEL
    temperature: float = 1.0
    retry_attempts: int = 3

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(
                f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}"
            )


@dataclass
class DecisionContext:
    """Everything one agent may see when deciding: its id, the round index,
    the network, the completed history, and its private random substream."""

    agent: int
    round: int
    network: CongestionNetwork
    history: Sequence[RoundRecord]
    rng: np.random.Generator
    axes: ReprAxes | None = None


class Policy:
    def decide(self, ctx: DecisionContext) -> int:
        raise NotImplementedError

    def observe(self, record: RoundRecord) -> None:
        """Deliver the finished round; default policies are stateless."""


# ---------------------------------------------------------------------------
# Weight-state arithmetic shared by MWU and EXP3
# ---------------------------------------------------------------------------

# Smallest normal double: keeps weights strictly positive through float
# underflow on long runs; renormalization alone only protects the max.
_WEIGHT_FLOOR = float(np.finfo(float).tiny)


@dataclass(frozen=True)
class WeightState:
    """Per-route positive weights; initialized to 1 for every route."""

    weights: np.ndarray
    learning_rate: float
    exploration_rate: float = 0.0

    @classmethod
    def initial(cls, k: int, learning_rate: float, exploration_rate: float = 0.0) -> WeightState:
        return cls(np.ones(k), learning_rate, exploration_rate)

    @property
    def k(self) -> int:
        return len(self.weights)


def loss_from_payoff(payoff: float, endowment: float) -> float:
    """Rescale a payoff in [0, endowment] to a loss in [0, 1]."""
    if not 0 <= payoff <= endowment:
        raise ValueError(f"payoff {payoff} outside [0, {endowment}]")
    return 1.0 - payoff / endowment


def mwu_probabilities(state: WeightState) -> np.ndarray:
    return state.weights / state.weights.sum()


def mwu_update(state: WeightState, losses: Sequence[float]) -> WeightState:
    """Full-feedback update w_i <- w_i * exp(-eta * loss_i), then renormalize
    so the largest weight is 1 (probability-invariant underflow guard)."""
    losses = np.asarray(losses, dtype=float)
    if losses.shape != (state.k,):
        raise ValueError(f"expected {state.k} losses, got shape {losses.shape}")
    if np.any(losses < 0) or np.any(losses > 1):
        raise ValueError(f"losses must lie in [0, 1], got {losses}")
    weights = state.weights * np.exp(-state.learning_rate * losses)
    weights = np.maximum(weights / weights.max(), _WEIGHT_FLOOR)
    return WeightState(weights, state.learning_rate, state.exploration_rate)


def exp3_probabilities(state: WeightState) -> np.ndarray:
    """Weight shares mixed with uniform exploration:
    p_i = (1 - gamma) * w_i / sum_j w_j + gamma / k."""
    gamma = state.exploration_rate
    return (1.0 - gamma) * state.weights / state.weights.sum() + gamma / state.k


def exp3_update(state: WeightState, played: int, loss: float, prob_played: float) -> WeightState:
    """Bandit update: only the played route's weight changes, using the
    unbiased importance-weighted estimate loss/prob_played."""
    if prob_played <= 0:
        raise ValueError(f"prob_played must be positive, got {prob_played}")
    if not 0 <= loss <= 1:
        raise ValueError(f"loss must lie in [0, 1], got {loss}")
    estimate = loss / prob_played
    weights = state.weights.copy()
    weights[played] *= np.exp(-state.learning_rate * estimate)
    weights = np.maximum(weights / weights.max(), _WEIGHT_FLOOR)
    return WeightState(weights, state.learning_rate, state.exploration_rate)


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


class UniformRandomPolicy(Policy):
    def __init__(self, network: CongestionNetwork, agent: int) -> None:
        self.network = network
        self.agent = agent

    def decide(self, ctx: DecisionContext) -> int:
        return int(ctx.rng.integers(len(self.network.routes)))


class BestResponsePolicy(Policy):
    """Myopically best-respond to the previous round's profile.

    Ties keep the current route (stabilizes equilibria); otherwise the
    lowest-index best route wins.  Round 1 is uniform random.
    """

    def __init__(self, network: CongestionNetwork, agent: int) -> None:
        self.network = network
        self.agent = agent

    def decide(self, ctx: DecisionContext) -> int:
        if not ctx.history:
            return int(ctx.rng.integers(len(self.network.routes)))
        last = ctx.history[-1]
        values = counterfactual_payoffs(self.network, last.choices, self.agent)
        ordered = [values[name] for name in self.network.route_names]
        current = last.choices.choices[self.agent]
        best = max(ordered)
        if ordered[current] == best:
            return current
        return ordered.index(best)


class MWUPolicy(Policy):
    """Multiplicative weights over routes with full (counterfactual) feedback."""

    def __init__(self, network: CongestionNetwork, agent: int, learning_rate: float = 0.75) -> None:
        self.network = network
        self.agent = agent
        self.state = WeightState.initial(len(network.routes), learning_rate)

    def decide(self, ctx: DecisionContext) -> int:
        return int(ctx.rng.choice(self.state.k, p=mwu_probabilities(self.state)))

    def observe(self, record: RoundRecord) -> None:
        values = counterfactual_payoffs(self.network, record.choices, self.agent)
        losses = [
            loss_from_payoff(values[name], self.network.endowment)
            for name in self.network.route_names
        ]
        self.state = mwu_update(self.state, losses)


class Exp3Policy(Policy):
    """EXP3 over routes with bandit feedback (realized payoff only)."""

    def __init__(
        self,
        network: CongestionNetwork,
        agent: int,
        learning_rate: float = 0.75,
        exploration_rate: float = 0.75,
    ) -> None:
        self.network = network
        self.agent = agent
        self.state = WeightState.initial(len(network.routes), learning_rate, exploration_rate)

    def decide(self, ctx: DecisionContext) -> int:
        return int(ctx.rng.choice(self.state.k, p=exp3_probabilities(self.state)))

    def observe(self, record: RoundRecord) -> None:
        # Weights are untouched between decide and observe, so the sampling
        # probability of the played route is recomputable here.
        played = record.choices.choices[self.agent]
        prob_played = float(exp3_probabilities(self.state)[played])
        loss = loss_from_payoff(record.payoffs[self.agent], self.network.endowment)
        self.state = exp3_update(self.state, played, loss, prob_played)


_FORMAT_REMINDER = (
    "Your previous response could not be interpreted. Answer with a single JSON "
    'instance that conforms to the output schema, for example {{"route": "{example}"}}, '
    "where the route is one of: {routes}."
)


class LLMPolicy(Policy):
    """Render the agent's context, call the chat backend once per attempt,
    and parse the JSON route answer; malformed or invalid answers trigger a
    re-prompt with a format reminder, up to ``retry_attempts`` total calls."""

    def __init__(
        self,
        network: CongestionNetwork,
        agent: int,
        axes: ReprAxes,
        client: ChatClient,
        *,
        model: str = DEFAULT_MODEL,
        temperature: float = 1.0,
        retry_attempts: int = 3,
        trial_id: str = "",
        n_agents: int = 18,
        rounds: int = 40,
    ) -> None:
        self.network = network
        self.agent = agent
        self.axes = axes
        self.client = client
        self.model = model
        self.temperature = temperature
        self.retry_attempts = retry_attempts
        self.trial_id = trial_id
        self.n_agents = n_agents
        self.rounds = rounds
        self.completions: list[str] = []

    def decide(self, ctx: DecisionContext) -> int:
        completions = self.completions if self.axes.style is PromptStyle.FULL_CHAT else None
        turns = render_context(
            ctx.history,
            ctx.agent,
            self.axes,
            self.network,
            completions=completions,
            n_agents=self.n_agents,
            rounds=self.rounds,
        )
        messages = list(turns_to_messages(turns))
        route_names = self.network.route_names
        last_error: Exception | None = None
        for attempt in range(self.retry_attempts):
            request = CompletionRequest(
                model=self.model,
                temperature=self.temperature,
                messages=tuple(messages),
            )
            raw = self.client.complete(
                request,
                trial=self.trial_id,
                agent=ctx.agent,
                round=ctx.round,
                attempt=attempt,
            )
            try:
                name = parse_route(raw, route_names)
            except (RouteParseError, InvalidRouteError) as exc:
                last_error = exc
                reminder = _FORMAT_REMINDER.format(
                    example=route_names[0], routes=", ".join(route_names)
                )
                messages.append({"role": "assistant", "content": raw})
                messages.append({"role": "user", "content": reminder})
                continue
            self.completions.append(raw)
            return self.network.route_index(name)
        raise last_error  # type: ignore[misc]


def build_policy(
    spec: AgentSpec,
    network: CongestionNetwork,
    agent: int,
    *,
    axes: ReprAxes | None = None,
    client: ChatClient | None = None,
    trial_id: str = "",
    n_agents: int = 18,
    rounds: int = 40,
) -> Policy:
    if spec.kind == "random":
        return UniformRandomPolicy(network, agent)
    if spec.kind == "best-response":
        return BestResponsePolicy(network, agent)
    if spec.kind == "mwu":
        return MWUPolicy(network, agent, learning_rate=spec.learning_rate)
    if spec.kind == "exp3":
        return Exp3Policy(
            network,
            agent,
            learning_rate=spec.learning_rate,
            exploration_rate=spec.exploration_rate,
        )
    if axes is None or client is None:
        raise ValueError("llm policies need a representation and a chat client")
    return LLMPolicy(
        network,
        agent,
        axes,
        client,
        model=spec.model,
        temperature=spec.temperature,
        retry_attempts=spec.retry_attempts,
        trial_id=trial_id,
        n_agents=n_agents,
        rounds=rounds,
    )
