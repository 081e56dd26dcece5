"""Natural-language encodings of game history for LLM agents.

A representation is identified by three axes: whose past actions are shown
(own only vs. everyone's route-count distribution), which feedback is shown
(payoff vs. regret), and how history is packaged (a full chat transcript
vs. a single cumulative summary block).  Codes follow the pattern
``{F|S}-{P|R}{E|O}``, e.g. ``S-RO`` is summarized, regret, own-only.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .network import CongestionNetwork, game_a, game_b

if TYPE_CHECKING:  # pragma: no cover
    from .engine import RoundRecord


class UnsupportedNetworkError(ValueError):
    """The prompt templates only cover the two canonical networks."""


class MissingTranscriptError(ValueError):
    """Full-chat rendering requires the agent's stored raw completions."""


class ActionInfo(enum.Enum):
    OWN_ONLY = "O"
    EVERYONE = "E"


class RewardInfo(enum.Enum):
    PAYOFF = "P"
    REGRET = "R"


class PromptStyle(enum.Enum):
    FULL_CHAT = "F"
    SUMMARY = "S"


@dataclass(frozen=True)
class ReprAxes:
    """One point in the eight-cell representation grid."""

    action_info: ActionInfo
    reward_info: RewardInfo
    style: PromptStyle

    def code(self) -> str:
        return f"{self.style.value}-{self.reward_info.value}{self.action_info.value}"

    @classmethod
    def parse(cls, code: str) -> ReprAxes:
        try:
            style_letter, rest = code.split("-")
            reward_letter, action_letter = rest
            return cls(
                action_info=ActionInfo(action_letter),
                reward_info=RewardInfo(reward_letter),
                style=PromptStyle(style_letter),
            )
        except (ValueError, KeyError) as exc:
            raise ValueError(
                f"unknown representation code {code!r}; "
                f"expected one of {', '.join(ALL_REPRESENTATION_CODES)}"
            ) from exc


ALL_REPRESENTATIONS: tuple[ReprAxes, ...] = tuple(
    ReprAxes(action, reward, style)
    for style in (PromptStyle.FULL_CHAT, PromptStyle.SUMMARY)
    for reward in (RewardInfo.PAYOFF, RewardInfo.REGRET)
    for action in (ActionInfo.EVERYONE, ActionInfo.OWN_ONLY)
)
ALL_REPRESENTATION_CODES: tuple[str, ...] = tuple(a.code() for a in ALL_REPRESENTATIONS)


@dataclass(frozen=True)
class ChatTurn:
    """One message in an agent's context.

    Roles map onto the chat-completion wire vocabulary as
    system -> system, environment -> user, agent -> assistant.
    """

    role: str  # "system" | "environment" | "agent"
    content: str


_SCHEMA_SECTION = """The output should be formatted as a JSON instance that conforms to the JSON schema below.

As an example, for the schema {"properties": {"foo": {"title": "Foo", "description": "a list of strings", "type": "array", "items": {"type": "string"}}}, "required": ["foo"]}
the object {"foo": ["bar", "baz"]} is a well-formatted instance of the schema. The object {"properties": {"foo": ["bar", "baz"]}} is not well-formatted.

Here is the output schema:

```
{"properties": {"route": {"title": "Route", "description": "choice of route", "type": "string"}}, "required": ["route"]}
```"""


def _canonical_game(network: CongestionNetwork) -> str:
    """Identify the network as Game A or B by structure, not by its label."""
    for kind, canonical in (("A", game_a(network.endowment)), ("B", game_b(network.endowment))):
        if network.routes == canonical.routes and dict(network.edges) == dict(canonical.edges):
            return kind
    raise UnsupportedNetworkError(
        f"no prompt template for network {network.name!r}; "
        "only the two canonical games are supported"
    )


def render_system_prompt(
    network: CongestionNetwork, *, n_agents: int = 18, rounds: int = 40
) -> str:
    """Game instructions sent with every decision request.

    Byte-stable for a given network and parameter set.  Only the two
    canonical networks are supported; the segment list, route list, and
    worked cost examples are adjusted between them.
    """
    kind = _canonical_game(network)
    endowment = network.endowment
    if kind == "A":
        segments = (
            "Segment O-L, cost function: 10 * X\n"
            "\n"
            "Segment O-R, cost function: 210\n"
            "\n"
            "Segment L-D, cost function: 210\n"
            "\n"
            "Segment R-D, cost function: 10 * X"
        )
        route_sentence = (
            "Each driver is required to choose one of 2 routes to travel from the "
            "starting point, denoted by O, to the final destination, denoted by D. "
            "There are 2 alternative routes and they are denoted by ['O-L-D', 'O-R-D']."
        )
        cost_paragraphs = (
            "Travel is always costly in terms of the time needed to complete a segment "
            "of the road, tolls, fuel etc. The travel costs are written near each segment "
            "of the route you choose. For example, if you choose route O-L-D, you will be "
            "charged a total cost of 10X + 210 where X indicates the number of participants "
            "who choose segment O-L to travel from O to L plus a fixed cost of 210 for "
            "traveling on segment L-D.\n"
            "\n"
            "Similarly, if you choose route O-R-D, you will be charged a total travel cost "
            "of 210 + 10Y, where Y indicates the number of participants who choose the "
            "segment R-D to drive from O to D.\n"
            "Please note that the cost charged for segments O-L and R-D depends on the "
            "number of drivers choosing them.\n"
            "\n"
            "In contrast, the cost charged for traveling on segments L-D and O-R is fixed "
            "at 210 and does not depend on the number of drivers choosing them."
        )
        example = (
            "Example.\n"
            "\n"
            f"If you happen to be the only driver who chooses route O-L-D, and all other "
            f"{n_agents - 1} drivers choose route O-R-D, then your travel cost from point O "
            f"to point D is equal to (10 x 1) + 210 = 220.\n"
            f"If, on another round, you and 2 more drivers choose route O-R-D and "
            f"{n_agents - 3} other drivers choose route O-L-D, then your travel cost for "
            f"that round will be 210 + (10 x 3) = 240."
        )
        available = "The available routes are: O-L-D, O-R-D"
    else:
        segments = (
            "Segment O-L, cost function: 10 * X\n"
            "\n"
            "Segment O-R, cost function: 210\n"
            "\n"
            "Segment L-D, cost function: 210\n"
            "\n"
            "Segment R-D, cost function: 10 * X\n"
            "\n"
            "Segment L-R, cost function: 0"
        )
        route_sentence = (
            "Each driver is required to choose one of 3 routes to travel from the "
            "starting point, denoted by O, to the final destination, denoted by D. "
            "There are 3 alternative routes and they are denoted by "
            "['O-L-D', 'O-R-D', 'O-L-R-D']."
        )
        cost_paragraphs = (
            "Travel is always costly in terms of the time needed to complete a segment "
            "of the road, tolls, fuel etc. The travel costs are written near each segment "
            "of the route you choose. For example, if you choose route O-L-D, you will be "
            "charged a total cost of 10X + 210 where X indicates the number of participants "
            "who choose segment O-L to travel from O to L plus a fixed cost of 210 for "
            "traveling on segment L-D.\n"
            "\n"
            "Similarly, if you choose route O-R-D, you will be charged a total travel cost "
            "of 210 + 10Y, where Y indicates the number of participants who choose the "
            "segment R-D to drive from O to D.\n"
            "\n"
            "If you choose route O-L-R-D, you will be charged a total travel cost of "
            "10X + 10Y, where X indicates the number of participants who choose segment "
            "O-L to travel from O to L and Y indicates the number of participants who "
            "choose segment R-D to travel from R to D. The cost charged for traveling on "
            "segment L-R is fixed at 0.\n"
            "Please note that the cost charged for segments O-L and R-D depends on the "
            "number of drivers choosing them.\n"
            "\n"
            "In contrast, the cost charged for traveling on segments L-D and O-R is fixed "
            "at 210 and does not depend on the number of drivers choosing them."
        )
        example = (
            "Example.\n"
            "\n"
            f"If you happen to be the only driver who chooses route O-L-R-D, and all other "
            f"{n_agents - 1} drivers choose route O-R-D, then your travel cost from point O "
            f"to point D is equal to (10 x 1) + 0 + (10 x {n_agents}) = {10 + 10 * n_agents}.\n"
            f"If, on another round, you and 2 more drivers choose route O-R-D and "
            f"{n_agents - 3} other drivers choose route O-L-D, then your travel cost for "
            f"that round will be 210 + (10 x 3) = 240."
        )
        available = "The available routes are: O-L-D, O-R-D, O-L-R-D"

    intro = (
        "You will be participating in an experiment on route selection in traffic networks.\n"
        "During this experiment you'll be asked to make many decisions about route "
        "selection in a traffic network game.\n"
        "Your payoff will depend on the decisions you make as well as the decisions made "
        f"by the other participants. There are {n_agents} participants in this experiment, "
        "including yourself, who will be asked to serve as drivers and choose a route to "
        "travel in a traffic network game that is described below.\n"
        f"You will play the game for {rounds} identical rounds."
    )
    endowment_section = (
        f"At the beginning of each round, you will receive an endowment of {endowment} points.\n"
        "Your payoff for each round will be determined by subtracting your travel cost "
        "from your endowment.\n"
        "Your goal is to maximize your payoff (likewise minimize your cost).\n"
        "At the end of each round, you will be informed of the number of drivers who chose "
        "each route and your payoff for that round.\n"
        f"All {rounds} rounds have exactly the same structure."
    )
    return "\n\n".join(
        [
            intro,
            "Consider the very simple traffic network described below.",
            "Nodes:",
            "O L R D",
            "Segments and associated costs:",
            segments,
            route_sentence,
            cost_paragraphs,
            "All the drivers make their route choices independently of one another and "
            "leave point O at the same time.",
            example,
            endowment_section,
            available,
            _SCHEMA_SECTION,
        ]
    )


def render_decision_request(network: CongestionNetwork) -> str:
    """The per-round instruction to pick a route and answer in schema JSON."""
    routes = ", ".join(network.route_names)
    return (
        f"Please choose your route for this round. The available routes are: {routes}.\n"
        "Think step-by-step about your decision, then provide your final answer as a "
        "JSON instance that conforms to the output schema."
    )


def render_round_block(record: RoundRecord, agent: int, axes: ReprAxes) -> str:
    """The lines describing one finished round from one agent's viewpoint."""
    route_names = list(record.distribution)
    own_route = route_names[record.choices.choices[agent]]
    lines = [f"Your Choice: {own_route}"]
    if axes.action_info is ActionInfo.EVERYONE:
        lines.append(f"Route Choice Distribution: {_format_distribution(record, agent)}")
    if axes.reward_info is RewardInfo.PAYOFF:
        lines.append(f"Your Payoff: {record.payoffs[agent]}")
    else:
        lines.append(f"Your Regret: {record.regrets[agent]}")
    return "\n".join(lines)


def _format_distribution(record: RoundRecord, agent: int) -> str:
    """Route counts ordered by descending count, the agent's own route first
    on ties, then catalog order; names single-quoted."""
    route_names = list(record.distribution)
    own_route = route_names[record.choices.choices[agent]]
    ordered = sorted(
        record.distribution.items(),
        key=lambda item: (
            -item[1],
            0 if item[0] == own_route else 1,
            route_names.index(item[0]),
        ),
    )
    body = ", ".join(f"'{name}': {count}" for name, count in ordered)
    return "{" + body + "}"


def render_context(
    history: Sequence[RoundRecord],
    agent: int,
    axes: ReprAxes,
    network: CongestionNetwork,
    *,
    completions: Sequence[str] | None = None,
    n_agents: int = 18,
    rounds: int = 40,
) -> list[ChatTurn]:
    """Build the full message context for one agent's next decision.

    Summary style packs all past rounds into a single environment turn;
    full-chat style interleaves the agent's stored raw completions with
    per-round environment summaries.  With no history, both styles reduce
    to the system message plus the decision request.
    """
    system = ChatTurn("system", render_system_prompt(network, n_agents=n_agents, rounds=rounds))
    request = render_decision_request(network)
    if not history:
        return [system, ChatTurn("environment", request)]

    if axes.style is PromptStyle.SUMMARY:
        blocks = "\n\n".join(
            f"Round {record.round}:\n{render_round_block(record, agent, axes)}"
            for record in history
        )
        body = f"You are agent {agent}.\n\nSummary of previous rounds:\n\n{blocks}\n\n{request}"
        return [system, ChatTurn("environment", body)]

    if completions is None or len(completions) != len(history):
        have = 0 if completions is None else len(completions)
        raise MissingTranscriptError(
            f"full-chat rendering needs one stored completion per past round "
            f"({len(history)} rounds, {have} completions)"
        )
    turns = [system]
    for record, completion in zip(history, completions):
        turns.append(ChatTurn("agent", completion))
        body = (
            f"You are agent {agent}.\n\nSummary of previous round:\n\n"
            f"{render_round_block(record, agent, axes)}\n\n{request}"
        )
        turns.append(ChatTurn("environment", body))
    return turns
