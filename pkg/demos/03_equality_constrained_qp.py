"""
Equality-constrained convex QP
==============================

The high-order tuner (``ht1``) on a strongly convex QP, checked against the
KKT solution and compared with gradient descent and Nesterov's method.
"""

import numpy as np

from htopt import StopRule, run_alg1, run_baseline, validate_gains
from htopt.oracle import kkt_solve_qp
from htopt.problemfile import library

pf = library()["qp5_affine"]
spec = pf.spec
rl = pf.reduced_loss()
print("dependent variables (0-based):", spec.partition.dependent)

# %%
# Ground truth from the KKT system.
kkt = kkt_solve_qp(spec.objective.Q, spec.objective.c, spec.equality.A, spec.equality.b)
theta_star = rl.partition.split(kkt.minimizer)[0]
print("KKT optimum:", kkt.optimal_value, " certificate:", kkt.certificate)

# %%
# Gains must satisfy 0 < beta < 1 and 0 < gamma < beta(2 - beta)/(8 + beta).
gains = validate_gains(0.9, 0.1)
print("gamma bound for beta = 0.9:", gains.bound)

state, trace = run_alg1(rl, pf.start(), None, gains, StopRule(grad_tol=1e-10))
print(f"ht1: {trace.status} after {trace.final.k} iterations, "
      f"theta error {np.linalg.norm(state.theta - theta_star, np.inf):.2e}, "
      f"max equality residual {max(trace.column('eq_residual_inf')):.1e}")

# %%
# Baselines use the step 1/L with L estimated by sampling.
for method in ("gradient-descent", "nesterov"):
    theta, bt = run_baseline(rl, pf.start(), StopRule(grad_tol=1e-10), method)
    print(f"{method}: {bt.status} after {bt.final.k} iterations, "
          f"theta error {np.linalg.norm(theta - theta_star, np.inf):.2e}")
