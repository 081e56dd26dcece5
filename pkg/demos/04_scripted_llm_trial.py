"""
LLM trials without an API: scripted runs and exact replay
=========================================================

The decision loop for LLM-backed agents is exercised offline by a scripted
backend that feeds canned completions.  Every request/response pair lands
in a transcript keyed by (trial, agent, round, attempt), and a replay
backend re-executes the trial from the transcript, decision for decision.
"""
import json

from routegames import (
    AgentSpec,
    ReplayBackend,
    ReprAxes,
    ScriptedBackend,
    TrialConfig,
    game_b,
    run_trial,
)

net = game_b()
config = TrialConfig(
    network=net,
    agent_spec=AgentSpec("llm"),
    n_agents=3,
    rounds=3,
    representation=ReprAxes.parse("S-RE"),
    seed=7,
)

# three agents x three rounds; agent 1 needs a second attempt in round 1
responses = ['I will try the upper route. {"route": "O-L-D"}',
             "scrambled non-answer",                       # retried with a reminder
             '{"route": "O-R-D"}',
             'The bridge looks free. {"route": "O-L-R-D"}']
responses += [json.dumps({"route": "O-L-R-D"})] * 6

recorded = run_trial(config, backend=ScriptedBackend(responses))
print("round distributions:")
for record in recorded.history:
    print(f"  round {record.round}: {record.distribution}  regrets {record.regrets}")

print(f"\ntranscript holds {len(recorded.transcript)} completion attempts")
retried = [e for e in recorded.transcript.entries() if e.attempt > 0]
print(f"retried attempts: {[(e.agent, e.round, e.attempt) for e in retried]}")

# the transcript is all a replay needs; decisions must match exactly
replayed = run_trial(config, backend=ReplayBackend(recorded.transcript))
match = [r.choices for r in replayed.history] == [r.choices for r in recorded.history]
print(f"\nreplay reproduces every decision: {match}")

# a peek at what agent 0 was actually sent in round 3
entry = recorded.transcript.get(config.trial_id, 0, 3, 0)
print("\nagent 0, round 3, final environment message:")
print(entry.request["messages"][-1]["content"])
