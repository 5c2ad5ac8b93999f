"""
A mixed equilibrium with three possible experiment counts
=========================================================

Build the mixed profile, read off the beliefs along the short histories, and
compare the exact distribution of experiments in the bad state with a Monte
Carlo run.
"""

import sys

from privexp.beliefs import BeliefSystem
from privexp.evaluator import eval_profile
from privexp.histories import all_histories
from privexp.model import ModelParams, disclosure_cutoff
from privexp.profiles import make_mixed_example
from privexp.simulate import SimConfig, simulate

params = ModelParams(0.2, 0.8, 1.0, 10.0, 0.37)
prof = make_mixed_example(params)
print(f"alpha={prof.alpha:.6f} beta={prof.beta:.6f}")

# beliefs of both players along the first few histories
BeliefSystem(prof.beliefs, 2).write_csv(all_histories(3), sys.stdout)
print("p*_2 =", disclosure_cutoff(params, 2))

exact = eval_profile(prof).experiments_given_bad
runs = 100_000
sim = simulate(SimConfig(prof, runs=runs, seed=3, theta="B"))
for k, p in exact.items():
    print(k, round(p, 4), round(sim.experiments["B"].get(k, 0) / runs, 4))

# the printed alpha leaves player 2 strictly preferring one action at RS;
# the solved alpha restores indifference
solved = make_mixed_example(params, exact_alpha=True)
print("solved alpha", round(solved.alpha, 6))
