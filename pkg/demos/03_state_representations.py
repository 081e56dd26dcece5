"""
Eight ways to tell an agent what happened
=========================================

A history encoding is a point on three axes: whose actions are shown (own
only vs. everyone's route counts), which feedback is shown (payoff vs.
regret), and whether history arrives as one cumulative summary or a full
chat transcript.  This demo renders the same three-round history under
several codes.
"""
from routegames import (
    ALL_REPRESENTATIONS,
    ActionProfile,
    ReprAxes,
    RoundRecord,
    game_a,
    payoffs,
    regret,
    render_context,
)

net = game_a()


def record(round_index, counts, own_route):
    remaining = list(counts)
    remaining[own_route] -= 1
    choices = [own_route]
    for route, count in enumerate(remaining):
        choices.extend([route] * count)
    profile = ActionProfile(tuple(choices))
    return RoundRecord(
        round=round_index,
        choices=profile,
        distribution=dict(zip(net.route_names, counts)),
        payoffs=payoffs(net, profile),
        regrets=tuple(regret(net, profile, agent) for agent in range(profile.n)),
    )


# agent 0 bounced between routes while the crowd herded back and forth
history = [record(1, [5, 13], 1), record(2, [17, 1], 0), record(3, [4, 14], 1)]

print("All eight codes:", " ".join(axes.code() for axes in ALL_REPRESENTATIONS))

for code in ("S-PE", "S-RO"):
    turns = render_context(history, 0, ReprAxes.parse(code), net)
    print(f"\n=== {code}: {len(turns)} turns; the environment turn reads ===")
    print(turns[1].content)

# Full-chat style needs the agent's own raw answers to rebuild the dialogue.
completions = ['Reasoning... {"route": "O-R-D"}',
               'Crowd moved. {"route": "O-L-D"}',
               'Back again. {"route": "O-R-D"}']
turns = render_context(history, 0, ReprAxes.parse("F-PE"), net, completions=completions)
print(f"\n=== F-PE: {len(turns)} turns (system, then agent/environment pairs) ===")
for turn in turns[1:5]:
    first_line = turn.content.splitlines()[0]
    print(f"[{turn.role:11s}] {first_line}")
