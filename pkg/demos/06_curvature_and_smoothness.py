"""
Normalizing signal and smoothness constants
===========================================

The tuner divides gradients by ``N = 1 + H``, with ``H`` the largest eigenvalue
of the reduced Hessian from power iteration on Hessian-vector products. A
conservative alternative uses a smoothness constant instead.
"""

import numpy as np

from htopt import (ConvexRegionSpec, ProblemSpec, QuadraticObjective, ReducedLoss,
                   estimate_lipschitz, smoothness_bound)
from htopt.problemfile import library

# %%
# Power iteration against an eigendecomposition.
H = np.array([[5.0, 1.0], [1.0, 3.0]])
rl = ReducedLoss(ProblemSpec(2, QuadraticObjective(H)))
print("power iteration:", rl.hessian_max_eigenvalue([0.0, 0.0]), " eigvalsh:", np.linalg.eigvalsh(H).max())

# %%
# The two policies on min |x|^2 s.t. x1 + x2 = 2.
pf = library()["qp_equality"]
rl = pf.reduced_loss()
print("exact N:", rl.normalizing_signal([0.0], "exact"))
print("conservative N:", rl.normalizing_signal([0.0], "conservative"))

# %%
# The conservative constant sqrt(1 + |P|) * L_bar is smaller than the
# measured curvature here: l(theta) = theta^2 + (2 - theta)^2 has l'' = 4,
# while sqrt(2) * 2 = 2.83. The curvature of f(theta, P theta + q) is
# bounded by (1 + |P|^2) * L_bar instead.
P = rl.completion.P
est = estimate_lipschitz(rl, ConvexRegionSpec.box([-5.0], [5.0]), 500)
print(f"estimate {est:.6f}, sqrt(1+|P|) L = {smoothness_bound(P, 2.0):.6f}, "
      f"(1+|P|^2) L = {(1 + np.linalg.norm(P, 2) ** 2) * 2.0:.6f}")

for name in ("qp5_affine", "qp_illcond"):
    pf = library()[name]
    rl = pf.reduced_loss()
    c = pf.start()
    est = estimate_lipschitz(rl, ConvexRegionSpec.box(c - 2, c + 2), 500)
    P = rl.completion.P
    print(f"{name}: estimate {est:.6g}, sqrt(1+|P|) L = {smoothness_bound(P, pf.spec.smoothness):.6g}, "
          f"(1+|P|^2) L = {(1 + np.linalg.norm(P, 2) ** 2) * pf.spec.smoothness:.6g}")
