"""Repeated atomic selfish-routing games with algorithmic and LLM agents."""

from .engine import (
    RoundFailureError,
    RoundRecord,
    TrialConfig,
    TrialFailure,
    TrialResult,
    make_agent_rngs,
    run_experiment,
    run_round,
    run_trial,
)
from .llm import (
    ChatClient,
    CompletionRequest,
    InvalidRouteError,
    LiveBackend,
    RateLimiter,
    ReplayBackend,
    ReplayMissError,
    RouteParseError,
    ScriptedBackend,
    TranscriptEntry,
    TranscriptStore,
    parse_route,
)
from .metrics import (
    DeviationSeries,
    ExperimentSummary,
    MetricSeries,
    deviation_score,
    focal_count,
    kendall_tau,
    summarize_experiment,
    switch_counts,
)
from .network import (
    ActionProfile,
    CongestionNetwork,
    EdgeCost,
    InvalidProfileError,
    Route,
    counterfactual_payoffs,
    edge_loads,
    game_a,
    game_b,
    payoffs,
    regret,
    route_cost,
)
from .policies import (
    AgentSpec,
    BestResponsePolicy,
    DecisionContext,
    Exp3Policy,
    LLMPolicy,
    MWUPolicy,
    Policy,
    UniformRandomPolicy,
    WeightState,
    build_policy,
    exp3_probabilities,
    exp3_update,
    loss_from_payoff,
    mwu_probabilities,
    mwu_update,
)
from .representations import (
    ALL_REPRESENTATION_CODES,
    ALL_REPRESENTATIONS,
    ActionInfo,
    ChatTurn,
    PromptStyle,
    ReprAxes,
    RewardInfo,
    render_context,
    render_decision_request,
    render_round_block,
    render_system_prompt,
)

__version__ = "0.1.0"
