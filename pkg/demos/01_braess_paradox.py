"""
The two canonical networks and the bridge paradox
==================================================

Game A routes 18 drivers from O to D over two symmetric routes; Game B adds
a free bridge edge L-R and a third route O-L-R-D.  Counterintuitively, the
extra capacity makes everyone worse off: at equilibrium each driver pays
300 in Game A but 360 in Game B.
"""
import numpy as np

from routegames import (
    ActionProfile,
    counterfactual_payoffs,
    game_a,
    game_b,
    payoffs,
    regret,
)

net_a = game_a()
net_b = game_b()
print("Game A routes:", ", ".join(net_a.route_names))
print("Game B routes:", ", ".join(net_b.route_names))

# Game A equilibrium: an even 9/9 split. Everyone pays 10*9 + 210 = 300.
even_split = ActionProfile((0,) * 9 + (1,) * 9)
print("\nGame A at a 9/9 split:")
print("  payoffs:", set(payoffs(net_a, even_split)))
print("  regrets:", {regret(net_a, even_split, agent) for agent in range(18)})

# Game B equilibrium: everyone on the bridge. Cost 10*18 + 0 + 10*18 = 360.
all_bridge = ActionProfile((2,) * 18)
print("\nGame B with all 18 drivers on the bridge:")
print("  payoffs:", set(payoffs(net_b, all_bridge)))
print("  regrets:", {regret(net_b, all_bridge, agent) for agent in range(18)})

# Why nobody leaves: a lone deviator onto a two-edge route would face an
# even higher cost (load 18 on the shared congestible edge plus the 210 toll).
print("  a deviator's options:", counterfactual_payoffs(net_b, all_bridge, 0))

# The bridge is a weakly dominant reply to *every* opponent configuration;
# check the full set of 171 splits of the other 17 drivers.
dominated = 0
for a in range(18):
    for b in range(18 - a):
        c = 17 - a - b
        profile = ActionProfile((0,) * a + (1,) * b + (2,) * c + (0,))
        values = counterfactual_payoffs(net_b, profile, 17)
        if values["O-L-R-D"] >= max(values.values()):
            dominated += 1
print(f"\nbridge is a best reply in {dominated}/171 opponent configurations")

# And yet: the average payoff across random profiles shows how much value
# the bridge equilibrium destroys relative to Game A's.
rng = np.random.default_rng(0)
sample = [payoffs(net_b, ActionProfile(tuple(rng.integers(0, 3, 18))))[0] for _ in range(1000)]
print(f"random-play payoff in Game B averages {np.mean(sample):.0f};"
      " equilibrium locks in 40")
