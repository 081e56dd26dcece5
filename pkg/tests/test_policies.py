from __future__ import annotations

import math

import numpy as np
import pytest

from routegames import (
    ActionProfile,
    AgentSpec,
    BestResponsePolicy,
    DecisionContext,
    Exp3Policy,
    MWUPolicy,
    RoundRecord,
    UniformRandomPolicy,
    WeightState,
    build_policy,
    exp3_probabilities,
    exp3_update,
    loss_from_payoff,
    mwu_probabilities,
    mwu_update,
    payoffs,
    regret,
)

from conftest import profile_with


def make_record(network, counts, own_route, round_index=1):
    profile = profile_with(counts, own_route)
    return RoundRecord(
        round=round_index,
        choices=profile,
        distribution=dict(zip(network.route_names, counts)),
        payoffs=payoffs(network, profile),
        regrets=tuple(regret(network, profile, agent) for agent in range(profile.n)),
    )


def ctx(network, agent=0, history=(), seed=0, round_index=None):
    return DecisionContext(
        agent=agent,
        round=len(history) + 1 if round_index is None else round_index,
        network=network,
        history=list(history),
        rng=np.random.default_rng(seed),
    )


# ---------------------------------------------------------------------------
# loss rescaling
# ---------------------------------------------------------------------------


def test_loss_from_payoff():
    assert loss_from_payoff(400, 400) == 0.0
    assert loss_from_payoff(0, 400) == 1.0
    assert loss_from_payoff(100, 400) == 0.75
    with pytest.raises(ValueError):
        loss_from_payoff(-1, 400)
    with pytest.raises(ValueError):
        loss_from_payoff(401, 400)


# ---------------------------------------------------------------------------
# MWU arithmetic
# ---------------------------------------------------------------------------


def test_mwu_probabilities_uniform_and_scale_invariant():
    assert np.allclose(mwu_probabilities(WeightState.initial(3, 0.75)), [1 / 3] * 3)
    doubled = WeightState(np.array([2.0, 2.0]), 0.75)
    assert np.allclose(mwu_probabilities(doubled), [0.5, 0.5])


def test_mwu_single_update_hand_computed():
    state = mwu_update(WeightState.initial(3, 0.75), [0.0, 0.5, 1.0])
    expected_weights = np.array([1.0, math.exp(-0.375), math.exp(-0.75)])
    assert np.allclose(state.weights, expected_weights, atol=1e-12)
    probs = mwu_probabilities(state)
    assert np.allclose(probs, expected_weights / expected_weights.sum(), atol=1e-12)
    assert np.allclose(probs, [0.46304, 0.31824, 0.21872], atol=1e-4)


def test_mwu_two_action_update():
    state = mwu_update(WeightState.initial(2, 0.75), [0.0, 1.0])
    assert np.allclose(mwu_probabilities(state), [1 / (1 + math.exp(-0.75)),
                                                  math.exp(-0.75) / (1 + math.exp(-0.75))])
    assert abs(mwu_probabilities(state)[0] - 0.6792) < 1e-4


def test_mwu_update_identity_cases():
    start = WeightState.initial(3, 0.75)
    assert np.allclose(mwu_probabilities(mwu_update(start, [0, 0, 0])), [1 / 3] * 3)
    # a uniform loss shift never moves the probabilities
    shifted = mwu_update(start, [0.4, 0.4, 0.4])
    assert np.allclose(mwu_probabilities(shifted), [1 / 3] * 3, atol=1e-12)


def test_mwu_constant_loss_shift_invariance():
    rng = np.random.default_rng(5)
    state = WeightState(rng.random(4) + 0.1, 0.75)
    losses = rng.random(4) * 0.5
    plain = mwu_update(state, losses)
    shifted = mwu_update(state, losses + 0.5)
    assert np.allclose(mwu_probabilities(plain), mwu_probabilities(shifted), atol=1e-12)


def test_mwu_update_validates_losses():
    state = WeightState.initial(2, 0.75)
    with pytest.raises(ValueError):
        mwu_update(state, [0.0, 1.5])
    with pytest.raises(ValueError):
        mwu_update(state, [-0.1, 0.5])
    with pytest.raises(ValueError):
        mwu_update(state, [0.5])


def test_mwu_concentration_in_stationary_environment():
    state = WeightState.initial(2, 0.75)
    for t in range(10):
        state = mwu_update(state, [0.0, 1.0])
        if mwu_probabilities(state)[0] > 0.99:
            break
    assert mwu_probabilities(state)[0] > 0.99
    assert t < 10


# ---------------------------------------------------------------------------
# EXP3 arithmetic
# ---------------------------------------------------------------------------


def test_exp3_probabilities_examples():
    uniform = WeightState.initial(2, 0.75, exploration_rate=0.75)
    assert np.allclose(exp3_probabilities(uniform), [0.5, 0.5])
    lopsided = WeightState(np.array([0.4724, 1.0]), 0.75, 0.75)
    assert np.allclose(exp3_probabilities(lopsided), [0.4552, 0.5448], atol=1e-4)
    assert np.isclose(exp3_probabilities(lopsided).sum(), 1.0)


def test_exp3_exploration_floor_and_ceiling():
    rng = np.random.default_rng(9)
    state = WeightState.initial(3, 0.75, exploration_rate=0.75)
    for _ in range(200):
        probs = exp3_probabilities(state)
        assert np.all(probs >= 0.25 - 1e-12)
        assert np.all(probs <= 0.5 + 1e-12)
        state = exp3_update(state, int(rng.integers(3)), float(rng.random()), float(probs[0]))


def test_exp3_update_hand_computed():
    state = WeightState.initial(2, 0.75, exploration_rate=0.75)
    unchanged = exp3_update(state, 0, 0.0, 0.5)
    assert np.allclose(unchanged.weights, [1.0, 1.0])
    updated = exp3_update(state, 0, 0.5, 0.5)  # estimate = 1
    assert np.allclose(updated.weights, [math.exp(-0.75), 1.0], atol=1e-12)


def test_exp3_update_validates_inputs():
    state = WeightState.initial(2, 0.75, 0.75)
    with pytest.raises(ValueError):
        exp3_update(state, 0, 0.5, 0.0)
    with pytest.raises(ValueError):
        exp3_update(state, 0, 1.5, 0.5)


def test_exp3_estimate_is_unbiased_monte_carlo():
    """Averaged over the sampled arm, the importance-weighted loss estimate
    vector recovers the true loss vector."""
    rng = np.random.default_rng(123)
    probs = np.array([0.5, 0.3, 0.2])
    losses = np.array([0.9, 0.4, 0.1])
    draws = 100_000
    arms = rng.choice(3, size=draws, p=probs)
    estimates = np.zeros((draws, 3))
    estimates[np.arange(draws), arms] = losses[arms] / probs[arms]
    assert np.allclose(estimates.mean(axis=0), losses, atol=0.01)


def test_weights_stay_positive_and_finite_after_many_random_updates():
    rng = np.random.default_rng(2024)
    state = WeightState.initial(3, 0.75, exploration_rate=0.75)
    for _ in range(1_000_000):
        probs = (0.25 * state.weights / state.weights.sum()) + 0.25
        arm = int(rng.integers(3))
        state = exp3_update(state, arm, float(rng.random()), float(probs[arm]))
    assert np.all(state.weights > 0)
    assert np.all(np.isfinite(state.weights))
    assert state.weights.max() == 1.0

    state = WeightState.initial(3, 0.75)
    for losses in rng.random((100_000, 3)):
        state = mwu_update(state, losses)
    assert np.all(state.weights > 0)
    assert np.all(np.isfinite(state.weights))


# ---------------------------------------------------------------------------
# policies
# ---------------------------------------------------------------------------


def test_uniform_random_policy_frequency(net_a):
    policy = UniformRandomPolicy(net_a, 0)
    context = ctx(net_a, seed=17)
    draws = [policy.decide(context) for _ in range(10_000)]
    share = sum(draws) / len(draws)
    assert abs(share - 0.5) < 0.02


def test_uniform_random_policy_reproducible(net_a):
    first = [UniformRandomPolicy(net_a, 0).decide(ctx(net_a, seed=4)) for _ in range(5)]
    second = [UniformRandomPolicy(net_a, 0).decide(ctx(net_a, seed=4)) for _ in range(5)]
    assert first == second


def test_best_response_moves_to_cheaper_route(net_a):
    record = make_record(net_a, [5, 13], own_route=1)
    policy = BestResponsePolicy(net_a, 0)
    # O-L-D costs 270 for the deviator, staying costs 340
    assert policy.decide(ctx(net_a, history=[record])) == 0


def test_best_response_always_picks_bridge(net_b):
    rng = np.random.default_rng(31)
    policy = BestResponsePolicy(net_b, 2)
    for _ in range(50):
        profile = ActionProfile(tuple(int(v) for v in rng.integers(0, 3, size=18)))
        record = RoundRecord(
            round=1,
            choices=profile,
            distribution=dict(zip(net_b.route_names, profile.route_counts(net_b))),
            payoffs=payoffs(net_b, profile),
            regrets=tuple(regret(net_b, profile, a) for a in range(18)),
        )
        assert policy.decide(ctx(net_b, agent=2, history=[record])) == 2


def test_best_response_keeps_route_at_equilibrium(net_a, net_b):
    even = make_record(net_a, [9, 9], own_route=0)
    assert BestResponsePolicy(net_a, 0).decide(ctx(net_a, history=[even])) == 0
    all_bridge = make_record(net_b, [0, 0, 18], own_route=2)
    assert BestResponsePolicy(net_b, 0).decide(ctx(net_b, history=[all_bridge])) == 2


def test_mwu_policy_learns_from_counterfactuals(net_b):
    policy = MWUPolicy(net_b, 0, learning_rate=0.75)
    record = make_record(net_b, [6, 6, 6], own_route=0)
    policy.observe(record)
    probs = mwu_probabilities(policy.state)
    assert probs[2] > probs[0]  # the bridge had the best counterfactual payoff
    assert probs[2] > probs[1]


def test_exp3_policy_updates_only_played_route(net_b):
    policy = Exp3Policy(net_b, 0, learning_rate=0.75, exploration_rate=0.75)
    record = make_record(net_b, [6, 6, 6], own_route=0)
    policy.observe(record)
    assert policy.state.weights[1] == policy.state.weights[2]
    assert policy.state.weights[0] < policy.state.weights[1]


def test_agent_spec_validates_kind():
    with pytest.raises(ValueError):
        AgentSpec(kind="quantal")
    assert AgentSpec(kind="mwu").learning_rate == 0.75
    assert AgentSpec(kind="exp3").exploration_rate == 0.75


def test_build_policy_dispatch(net_a):
    assert isinstance(build_policy(AgentSpec("random"), net_a, 0), UniformRandomPolicy)
    assert isinstance(build_policy(AgentSpec("best-response"), net_a, 0), BestResponsePolicy)
    assert isinstance(build_policy(AgentSpec("mwu"), net_a, 0), MWUPolicy)
    assert isinstance(build_policy(AgentSpec("exp3"), net_a, 0), Exp3Policy)
    with pytest.raises(ValueError):
        build_policy(AgentSpec("llm"), net_a, 0)
