from __future__ import annotations

import pytest

from routegames import (
    ALL_REPRESENTATION_CODES,
    ALL_REPRESENTATIONS,
    ActionInfo,
    PromptStyle,
    ReprAxes,
    RewardInfo,
    RoundRecord,
    game_a,
    payoffs,
    regret,
    render_context,
    render_decision_request,
    render_round_block,
    render_system_prompt,
)
from routegames.network import CongestionNetwork, EdgeCost, Route
from routegames.representations import MissingTranscriptError, UnsupportedNetworkError

from conftest import profile_with


def make_record(network, round_index, counts, own_route):
    profile = profile_with(counts, own_route)
    return RoundRecord(
        round=round_index,
        choices=profile,
        distribution=dict(zip(network.route_names, counts)),
        payoffs=payoffs(network, profile),
        regrets=tuple(regret(network, profile, agent) for agent in range(profile.n)),
    )


def test_axes_codes_round_trip():
    assert ALL_REPRESENTATION_CODES == (
        "F-PE", "F-PO", "F-RE", "F-RO", "S-PE", "S-PO", "S-RE", "S-RO",
    )
    for axes in ALL_REPRESENTATIONS:
        assert ReprAxes.parse(axes.code()) == axes


def test_axes_parse_rejects_unknown_codes():
    for bad in ("S-XO", "Q-PE", "SPE", "S-P", ""):
        with pytest.raises(ValueError):
            ReprAxes.parse(bad)


def test_system_prompt_game_a(net_a):
    prompt = render_system_prompt(net_a)
    assert "The available routes are: O-L-D, O-R-D" in prompt
    assert prompt.count("Segment ") == 4
    assert "There are 18 participants" in prompt
    assert "endowment of 400 points" in prompt
    assert "(10 x 1) + 210 = 220" in prompt
    assert "210 + (10 x 3) = 240" in prompt
    assert prompt.endswith(
        '{"properties": {"route": {"title": "Route", "description": "choice of route", '
        '"type": "string"}}, "required": ["route"]}\n```'
    )


def test_system_prompt_game_b(net_b):
    prompt = render_system_prompt(net_b)
    assert "The available routes are: O-L-D, O-R-D, O-L-R-D" in prompt
    assert "Segment L-R, cost function: 0" in prompt
    assert prompt.count("Segment ") == 5
    assert "['O-L-D', 'O-R-D', 'O-L-R-D']" in prompt
    assert "(10 x 1) + 0 + (10 x 18) = 190" in prompt


def test_system_prompt_is_parameterized(net_a):
    prompt = render_system_prompt(net_a, n_agents=6, rounds=10)
    assert "There are 6 participants" in prompt
    assert "for 10 identical rounds" in prompt
    assert "all other 5 drivers" in prompt


def test_system_prompt_rejects_noncanonical_networks():
    other = CongestionNetwork(
        name="other",
        nodes=frozenset(["O", "D"]),
        edges={("O", "D"): EdgeCost(1, 0)},
        routes=(Route.from_nodes(["O", "D"]),),
    )
    with pytest.raises(UnsupportedNetworkError):
        render_system_prompt(other)


def test_system_prompt_byte_stable(net_a):
    assert render_system_prompt(net_a) == render_system_prompt(game_a())


def test_decision_request(net_a, net_b):
    request_a = render_decision_request(net_a)
    assert "O-L-D, O-R-D" in request_a
    assert "step-by-step" in request_a
    request_b = render_decision_request(net_b)
    assert "O-L-D, O-R-D, O-L-R-D" in request_b


S_PE = ReprAxes(ActionInfo.EVERYONE, RewardInfo.PAYOFF, PromptStyle.SUMMARY)
S_PO = ReprAxes(ActionInfo.OWN_ONLY, RewardInfo.PAYOFF, PromptStyle.SUMMARY)
S_RE = ReprAxes(ActionInfo.EVERYONE, RewardInfo.REGRET, PromptStyle.SUMMARY)
S_RO = ReprAxes(ActionInfo.OWN_ONLY, RewardInfo.REGRET, PromptStyle.SUMMARY)
F_PE = ReprAxes(ActionInfo.EVERYONE, RewardInfo.PAYOFF, PromptStyle.FULL_CHAT)


def test_round_block_everyone_payoff(net_a):
    record = make_record(net_a, 1, [5, 13], own_route=1)
    assert render_round_block(record, 0, S_PE) == (
        "Your Choice: O-R-D\n"
        "Route Choice Distribution: {'O-R-D': 13, 'O-L-D': 5}\n"
        "Your Payoff: 60"
    )


def test_round_block_own_regret(net_a):
    record = make_record(net_a, 2, [17, 1], own_route=0)
    assert render_round_block(record, 0, S_RO) == "Your Choice: O-L-D\nYour Regret: 150"


def test_round_block_own_payoff(net_a):
    record = make_record(net_a, 3, [1, 17], own_route=0)
    assert render_round_block(record, 0, S_PO) == "Your Choice: O-L-D\nYour Payoff: 180"


def test_distribution_breaks_count_ties_with_own_route_first(net_a):
    record = make_record(net_a, 1, [9, 9], own_route=1)
    assert "{'O-R-D': 9, 'O-L-D': 9}" in render_round_block(record, 0, S_PE)
    record = make_record(net_a, 1, [9, 9], own_route=0)
    assert "{'O-L-D': 9, 'O-R-D': 9}" in render_round_block(record, 0, S_PE)


def test_distribution_includes_zero_count_routes(net_b):
    record = make_record(net_b, 1, [0, 0, 18], own_route=2)
    assert "{'O-L-R-D': 18, 'O-L-D': 0, 'O-R-D': 0}" in render_round_block(record, 0, S_PE)


def test_own_only_is_strict_subsequence_of_everyone(net_a):
    record = make_record(net_a, 1, [5, 13], own_route=1)
    everyone = render_round_block(record, 0, S_PE).splitlines()
    own = render_round_block(record, 0, S_PO).splitlines()
    assert own == [line for line in everyone if not line.startswith("Route Choice Distribution")]


def test_reward_axis_changes_only_last_line(net_a):
    record = make_record(net_a, 1, [5, 13], own_route=1)
    payoff_lines = render_round_block(record, 0, S_PE).splitlines()
    regret_lines = render_round_block(record, 0, S_RE).splitlines()
    assert payoff_lines[:-1] == regret_lines[:-1]
    assert payoff_lines[-1].startswith("Your Payoff: ")
    assert regret_lines[-1].startswith("Your Regret: ")


def test_style_axis_never_alters_round_blocks(net_a):
    record = make_record(net_a, 1, [5, 13], own_route=1)
    full = ReprAxes(S_PE.action_info, S_PE.reward_info, PromptStyle.FULL_CHAT)
    assert render_round_block(record, 0, S_PE) == render_round_block(record, 0, full)


def test_summary_context_structure(net_a):
    history = [
        make_record(net_a, 1, [5, 13], own_route=1),
        make_record(net_a, 2, [17, 1], own_route=0),
        make_record(net_a, 3, [4, 14], own_route=1),
    ]
    turns = render_context(history, 0, S_PE, net_a)
    assert len(turns) == 2
    assert turns[0].role == "system"
    assert turns[1].role == "environment"
    body = turns[1].content
    assert body.startswith("You are agent 0.\n\nSummary of previous rounds:\n\n")
    for k in (1, 2, 3):
        assert f"Round {k}:" in body
    assert body.rstrip().endswith("conforms to the output schema.")


def test_full_chat_context_structure(net_a):
    history = [make_record(net_a, k, [5, 13], own_route=1) for k in range(1, 10)]
    completions = [f'I pick O-R-D. {{"route": "O-R-D"}}' for _ in range(9)]
    turns = render_context(history, 0, F_PE, net_a, completions=completions)
    assert len(turns) == 1 + 2 * 9
    assert turns[0].role == "system"
    roles = [t.role for t in turns[1:]]
    assert roles == ["agent", "environment"] * 9
    assert "Summary of previous round:" in turns[2].content


def test_full_chat_requires_completions(net_a):
    history = [make_record(net_a, 1, [5, 13], own_route=1)]
    with pytest.raises(MissingTranscriptError):
        render_context(history, 0, F_PE, net_a)
    with pytest.raises(MissingTranscriptError):
        render_context(history, 0, F_PE, net_a, completions=[])


def test_empty_history_context(net_a):
    for axes in (S_PE, F_PE):
        turns = render_context([], 0, axes, net_a)
        assert len(turns) == 2
        assert turns[0].role == "system"
        assert turns[1].content == render_decision_request(net_a)


def test_rendering_is_deterministic(net_a):
    history = [make_record(net_a, 1, [5, 13], own_route=1)]
    first = render_context(history, 0, S_RE, net_a)
    second = render_context(history, 0, S_RE, net_a)
    assert first == second
