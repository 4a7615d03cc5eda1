"""
Inequality constraints by penalty and correction
================================================

``min |x|^2`` subject to ``x1 + x2 = 2`` and ``x1 <= 0.8``. The inequality
enters the loss as a squared softplus penalty. ``ht2`` also applies a
correction step along the equality manifold after every update.
"""

from htopt import PenaltyWeights, StopRule, rho, run_alg1, run_alg2, validate_gains
from htopt.oracle import grid_minimize, reference_minimize
from htopt.problemfile import library

pf = library()["ineq_qp"]
rl = pf.reduced_loss()

# %%
# The correction moves theta and the dependent block together, so x1 + x2 = 2
# still holds afterwards.
x = rl.complete([1.5])
y = rho(x, rl, alpha=0.3)
print("before:", x, " after:", y, " sum after:", y.sum())

# %%
# The penalized surrogate has its minimizer slightly past the bound.
ref = reference_minimize(pf.reduced_loss(), [0.0])
grid = grid_minimize(lambda t: rl.value(t), [-2.0], [3.0])
print(f"surrogate minimizer: reference {ref.minimizer[0]:.10f}, grid {grid.minimizer[0]:.10f}")

# %%
# ht2 with several correction step sizes; alpha = 0 reproduces ht1.
for alpha in (0.0, 0.05, 0.1, 0.5):
    state, trace = run_alg2(rl, pf.start(), None, validate_gains(0.5, 0.08, alpha), StopRule())
    print(f"alpha={alpha:<5} {trace.status} k={trace.final.k:4d} theta={state.theta[0]:.10f} "
          f"violation={trace.final.ineq_violation_inf:.4f}")

_, t1 = run_alg1(rl, pf.start(), None, validate_gains(0.5, 0.08), StopRule(max_iters=50))
_, t2 = run_alg2(rl, pf.start(), None, validate_gains(0.5, 0.08, 0.0), StopRule(max_iters=50))
print("alpha = 0 trace identical to ht1:", t1.rows == t2.rows)

# %%
# A larger penalty weight pulls the surrogate minimizer toward the bound.
for lam in (1.0, 10.0, 100.0):
    rl_lam = pf.reduced_loss(weights=PenaltyWeights(1.0, lam))
    print(f"lambda_g={lam:<6} minimizer {reference_minimize(rl_lam, [0.0]).minimizer[0]:.6f}")
