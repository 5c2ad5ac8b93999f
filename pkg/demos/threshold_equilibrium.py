"""
When does the encouragement threshold form an equilibrium?
==========================================================

Sweep the prior and compare the closed-form conditions with the deviation
checker.  The last point satisfies the published condition but fails the check:
the first mover at (RR)^(n-1) would rather stop.
"""

import warnings

from privexp.errors import GenericityViolation
from privexp.model import ModelParams
from privexp.profiles import make_threshold_phat
from privexp.verify import one_shot_deviation_check, threshold_conditions

warnings.simplefilter("ignore", GenericityViolation)
base = ModelParams(0.2, 0.5, 1.0, 10.0, 0.5)

for p0 in (0.45, 0.47, 0.50, 0.54, 0.588):
    params = base.with_prior(p0)
    cond = threshold_conditions(params)
    report = one_shot_deviation_check(make_threshold_phat(params), 2 * (cond["n"] + 3))
    worst = max(report.failures, key=lambda f: f.gain) if report.failures else None
    print(f"p0={p0:<6} n={cond['n']} stated={cond['stated']!s:<5} refined={cond['refined']!s:<5} "
          f"check={report.verdict}", f"worst: {worst.deviation} at {worst.history}" if worst else "")
