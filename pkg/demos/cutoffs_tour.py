"""
Cutoffs and experiment counts
=============================

Where each cutoff sits at the default parameters, and how many failures it
takes to fall below each one.
"""

from privexp.model import DEFAULT_PARAMS, after_failures, cutoff_set
from privexp.payoffs import one_player_policy_length, one_player_value

params = DEFAULT_PARAMS
cuts = cutoff_set(params, n_max=8)

# the five single-number cutoffs, lowest first
for name in sorted(["p_tilde", "p_star_social", "p_hat", "p_star", "p_myop"], key=lambda k: getattr(cuts, k)):
    print(f"{name:<14}{getattr(cuts, name):.6f}")

# counts: failures until the prior drops below each cutoff
print({k: getattr(cuts, k) for k in ("N_star", "N_star_social", "N_hat", "N_tilde")})

# indexed cutoffs move toward their limits as undisclosed experiments pile up
for n in (0, 1, 2, 4, 8):
    print(n, round(cuts.p_hat_n[n], 6), round(cuts.p_star_n[n], 6))

# a single agent walks down the failure ladder and stops at the one-player cutoff
steps = one_player_policy_length(params.prior, params)
print("single agent experiments", steps, "times; last belief", round(after_failures(params.prior, steps - 1, params), 4))
print("its value", round(one_player_value(params.prior, params), 6))

for name, holds in cuts.orderings(params).items():
    print("ok " if holds else "NO ", name)
