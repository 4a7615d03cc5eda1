"""
Nonconvex equality constraints with projection
==============================================

``min (x1 - 2)^2 + (x2 - 5)^2`` subject to ``x2 = x1^2``. The reduced loss
``l(theta) = (theta - 2)^2 + (theta^2 - 5)^2`` is convex on ``[3, 10]``, and
``ht3`` keeps every iterate inside that box by projection.
"""

import numpy as np

from htopt import Projector, StopRule, run_alg3, run_alg4, validate_gains
from htopt.oracle import grid_minimize
from htopt.problemfile import library

pf = library()["nonconvex_parabola"]
rl = pf.reduced_loss()
print("region:", pf.region.to_dict())

# %%
# Midpoint convexity on the box, sampled.
rng = np.random.default_rng(1)
pairs = rng.uniform(3, 10, size=(500, 2, 1))
slack = min(0.5 * rl.value(a) + 0.5 * rl.value(b) - rl.value(0.5 * (a + b)) for a, b in pairs)
print("worst midpoint slack on [3, 10]:", slack)

# %%
# Grid oracle and ht3.
grid = grid_minimize(lambda t: rl.value(t), [3.0], [10.0])
print("grid oracle:", grid.minimizer, grid.optimal_value)
iterates = []
state, trace = run_alg3(rl, pf.start(), None, validate_gains(0.5, 0.08), StopRule(), pf.region,
                        callback=iterates.append)
box = Projector(pf.region)
print(f"ht3: theta={state.theta[0]}, x={rl.complete(state.theta)}, l={trace.final.l}, "
      f"all iterates inside: {all(box.contains(s.theta, 1e-12) for s in iterates)}")

# %%
# The stop measure is the gradient mapping N * |theta - Proj(theta - grad/N)|,
# zero at the boundary minimizer although the gradient there is 50.
print("gradient at the solution:", rl.gradient(state.theta)[0], " measure:", trace.final.grad_norm)

# %%
# Adding x2 <= 9.5 (inactive at the solution) and running ht4.
pf4 = library()["nonconvex_ineq"]
rl4 = pf4.reduced_loss()
state4, trace4 = run_alg4(rl4, pf4.start(), None, validate_gains(0.5, 0.08, 0.05), StopRule(),
                          pf4.region)
print(f"ht4: theta={state4.theta[0]}, l={trace4.final.l:.6f} (includes the softplus penalty)")
