"""
No-regret baselines: multiplicative weights and EXP3
====================================================

Both algorithms play the repeated games for 40 rounds at learning rate
0.75, with payoffs rescaled from [0, 400] to losses in [0, 1].  MWU sees
the loss of every route each round (full feedback); EXP3 only the route it
took (bandit feedback).  Fifty seeded trials take a couple of seconds.
"""
from routegames import AgentSpec, TrialConfig, game_a, game_b, run_experiment, summarize_experiment

TRIALS = 50

for kind in ("mwu", "exp3"):
    for network in (game_a(), game_b()):
        config = TrialConfig(network=network, agent_spec=AgentSpec(kind), rounds=40)
        results = run_experiment(config, TRIALS, seed_base=1_000)
        summary = summarize_experiment(results, label=kind.upper())

        occupancy = "  ".join(
            f"{name}: {stat.mean:5.2f} (se {stat.se_trials:.2f})"
            for name, stat in summary.route_stats.items()
        )
        print(f"{kind.upper():4s} | Game {network.name} | {occupancy}")
        print(
            f"     | mean payoff {summary.series['payoff'].mean:6.1f}"
            f" | mean regret {summary.series['regret'].mean:5.1f}"
            f" | switches/agent {summary.switches_per_agent_mean:4.1f}"
            f" | tau {summary.deviation.mean_tau if summary.deviation.mean_tau is None else round(summary.deviation.mean_tau, 2)}"
        )

# Expected picture: both algorithms hold the even split in Game A. In Game B,
# MWU's full feedback pulls most agents onto the bridge within 40 rounds,
# while EXP3's forced exploration (rate 0.75) caps any route probability at
# (1 - 0.75) + 0.75/3 = 0.5, so its bridge occupancy saturates near 9.
