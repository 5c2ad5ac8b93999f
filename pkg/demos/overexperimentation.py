"""
How far past the planner's count can extra rounds go?
=====================================================

Along success rates 1/k with patience 1 - 1/k^2, find the most extra joint
rounds that remain an equilibrium and compare the resulting experiment count
with the planner's.
"""

import math
import warnings

from privexp.errors import GenericityViolation
from privexp.reproduce import prop2_ratio, root_x0

warnings.simplefilter("ignore", GenericityViolation)
x0 = root_x0()
print(f"x0 = {x0:.10f}, limit = {2 * x0 / math.log(2):.6f}")

for row in prop2_ratio(ks=(10, 50, 200, 1000)).rows:
    print(f"k={row['k']:<5} extra rounds={row['n_max']:<4} N_e={row['N_e']:<5} "
          f"planner={row['N_star_social']:<4} ratio={row['ratio']:.4f}")
