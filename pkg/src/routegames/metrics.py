"""Aggregate metrics over trials: focal-route occupancy, payoffs, regrets,
switch counts, equilibrium deviation scores, and Kendall tau convergence.

Aggregation order follows a fixed convention: average within a trial over
rounds first, then across trials; standard errors are computed over trials
with the n-1 sample standard deviation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np
from scipy.stats import kendalltau

from .network import CongestionNetwork

if TYPE_CHECKING:  # pragma: no cover
    from .engine import RoundRecord

METRIC_NAMES = ("focal", "payoff", "regret", "switch_rate")


def focal_count(network: CongestionNetwork, distribution: Mapping[str, int]) -> int:
    """Occupancy of the focal route: the least-congested route in Game A,
    the bridge route O-L-R-D in Game B."""
    if network.name == "A":
        return min(distribution[name] for name in network.route_names)
    if network.name == "B":
        return distribution["O-L-R-D"]
    raise ValueError(f"no focal route defined for game {network.name!r}")


def focal_series(
    network: CongestionNetwork, history: Sequence[RoundRecord]
) -> tuple[int, ...] | None:
    """Per-round focal-route occupancy; None for games without a focal route."""
    if network.name not in ("A", "B"):
        return None
    return tuple(focal_count(network, record.distribution) for record in history)


def switch_counts(history: Sequence[RoundRecord]) -> list[int]:
    """Per-agent number of rounds t >= 2 whose route differs from round t-1."""
    if not history:
        raise ValueError("history is empty")
    n_agents = history[0].choices.n
    counts = [0] * n_agents
    for previous, current in zip(history, history[1:]):
        for agent in range(n_agents):
            if current.choices.choices[agent] != previous.choices.choices[agent]:
                counts[agent] += 1
    return counts


def switches_by_round(history: Sequence[RoundRecord]) -> list[int]:
    """Number of agents switching in each round; round 1 is always 0."""
    n_agents = history[0].choices.n
    result = [0]
    for previous, current in zip(history, history[1:]):
        result.append(
            sum(
                1
                for agent in range(n_agents)
                if current.choices.choices[agent] != previous.choices.choices[agent]
            )
        )
    return result


def deviation_score(network: CongestionNetwork, distribution: Mapping[str, int]) -> int:
    """L1 distance between the round's route counts and the pure-equilibrium
    counts: an even split in Game A, everyone on the bridge in Game B.

    Defined for the canonical 18-agent games; other agent counts use the
    scaled targets (n/2 per route in A, all n on the bridge in B) as an
    extension of the same formula.
    """
    n = sum(distribution.values())
    if network.name == "A":
        counts = [distribution[name] for name in network.route_names]
        # |c0 - n/2| + |c1 - n/2| == |2*c0 - n| exactly, keeping integers.
        return abs(2 * counts[0] - n)
    if network.name == "B":
        side = sum(count for name, count in distribution.items() if name != "O-L-R-D")
        return side + abs(distribution["O-L-R-D"] - n)
    raise ValueError(f"no deviation score defined for game {network.name!r}")


def kendall_tau(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Tie-adjusted Kendall rank correlation (tau-b), or None when one of
    the series has no variability (the coefficient is undefined then)."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError("need at least two observations")
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        return None
    result = kendalltau(xs, ys, variant="b")
    tau = float(result.statistic)
    return None if math.isnan(tau) else tau


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values))


def _se(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


@dataclass(frozen=True)
class MetricSeries:
    """One metric across a set of trials.

    ``per_round`` has shape (trials, rounds); ``per_trial_mean`` averages
    each trial over rounds; ``mean``/``se`` aggregate those across trials;
    ``round_mean``/``round_se`` aggregate across trials round by round for
    trajectory plots.
    """

    name: str
    per_round: np.ndarray
    per_trial_mean: np.ndarray
    mean: float
    se: float
    round_mean: np.ndarray
    round_se: np.ndarray

    @classmethod
    def from_matrix(cls, name: str, matrix: np.ndarray) -> MetricSeries:
        per_trial = matrix.mean(axis=1)
        trials = matrix.shape[0]
        round_se = (
            matrix.std(axis=0, ddof=1) / math.sqrt(trials)
            if trials > 1
            else np.zeros(matrix.shape[1])
        )
        return cls(
            name=name,
            per_round=matrix,
            per_trial_mean=per_trial,
            mean=float(per_trial.mean()),
            se=_se(per_trial),
            round_mean=matrix.mean(axis=0),
            round_se=round_se,
        )


@dataclass(frozen=True)
class RouteStat:
    """Cross-trial mean occupancy of one route, with both error estimates:
    the standard error of per-trial means across trials, and the mean
    within-trial standard deviation across rounds."""

    mean: float
    se_trials: float
    sd_rounds: float


@dataclass(frozen=True)
class DeviationSeries:
    """Per-round equilibrium deviation scores and their per-trial Kendall
    tau against the round number; undefined taus (constant scores) are
    excluded from the cross-trial mean and counted."""

    per_round: np.ndarray
    taus: tuple[float | None, ...]
    mean_tau: float | None
    undefined_count: int


@dataclass(frozen=True)
class ExperimentSummary:
    label: str
    n_trials: int
    n_failures: int
    route_names: tuple[str, ...]
    route_stats: dict[str, RouteStat]
    series: dict[str, MetricSeries]
    deviation: DeviationSeries
    switches_per_agent_mean: float
    switches_per_agent_se: float


def successful(results: Sequence) -> list:
    """Filter out TrialFailure entries (anything without a history)."""
    return [r for r in results if hasattr(r, "history")]


def summarize_experiment(results: Sequence, label: str = "") -> ExperimentSummary:
    """Aggregate a homogeneous batch of trial results into the four metric
    series, per-route occupancy statistics, and deviation/tau statistics."""
    ok = successful(results)
    if not ok:
        raise ValueError("no successful trials to summarize")
    network = ok[0].config.network
    rounds = ok[0].config.rounds
    n_agents = ok[0].config.n_agents
    for result in ok:
        if (
            result.config.rounds != rounds
            or result.config.n_agents != n_agents
            or result.config.network.route_names != network.route_names
        ):
            raise ValueError("trials have heterogeneous configs")

    count_matrix = {name: np.empty((len(ok), rounds)) for name in network.route_names}
    focal = np.empty((len(ok), rounds))
    payoff = np.empty((len(ok), rounds))
    regret_m = np.empty((len(ok), rounds))
    switch_rate = np.empty((len(ok), rounds))
    deviation = np.empty((len(ok), rounds), dtype=int)
    taus: list[float | None] = []
    switch_means = []

    for i, result in enumerate(ok):
        for t, record in enumerate(result.history):
            for name in network.route_names:
                count_matrix[name][i, t] = record.distribution[name]
            focal[i, t] = focal_count(network, record.distribution)
            payoff[i, t] = _mean(record.payoffs)
            regret_m[i, t] = _mean(record.regrets)
            deviation[i, t] = deviation_score(network, record.distribution)
        switch_rate[i, :] = np.array(switches_by_round(result.history)) / n_agents
        taus.append(kendall_tau(range(1, rounds + 1), deviation[i, :]))
        switch_means.append(_mean(switch_counts(result.history)))

    defined = [t for t in taus if t is not None]
    route_stats = {}
    for name in network.route_names:
        matrix = count_matrix[name]
        per_trial = matrix.mean(axis=1)
        sd_rounds = (
            float(np.mean(matrix.std(axis=1, ddof=1))) if rounds > 1 else 0.0
        )
        route_stats[name] = RouteStat(
            mean=float(per_trial.mean()), se_trials=_se(per_trial), sd_rounds=sd_rounds
        )

    return ExperimentSummary(
        label=label,
        n_trials=len(ok),
        n_failures=len(results) - len(ok),
        route_names=network.route_names,
        route_stats=route_stats,
        series={
            "focal": MetricSeries.from_matrix("focal", focal),
            "payoff": MetricSeries.from_matrix("payoff", payoff),
            "regret": MetricSeries.from_matrix("regret", regret_m),
            "switch_rate": MetricSeries.from_matrix("switch_rate", switch_rate),
        },
        deviation=DeviationSeries(
            per_round=deviation,
            taus=tuple(taus),
            mean_tau=_mean(defined) if defined else None,
            undefined_count=len(taus) - len(defined),
        ),
        switches_per_agent_mean=_mean(switch_means),
        switches_per_agent_se=_se(switch_means),
    )
