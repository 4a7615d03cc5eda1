"""
Eliminating equality constraints
================================

A completion map writes the dependent variables as a function of the
independent ones, so every point it produces satisfies the equalities. The
solver then minimizes the reduced loss over the independent variables only.
"""

import numpy as np

from htopt import (AffineEquality, ExpressionField, ExpressionFunction, NewtonCompletion,
                   ProblemSpec, QuadraticObjective, ReducedLoss, VariablePartition,
                   build_affine_completion, residual_equality)

# %%
# Affine case: x1 + x2 = 2 with x2 dependent gives p(theta) = -theta + 2.
part = VariablePartition(2, (1,))
cmap = build_affine_completion([[1.0, 1.0]], [2.0], part)
print("P =", cmap.P.tolist(), " q =", cmap.q.tolist())
print("complete(0.5) =", cmap.complete([0.5]))

# %%
# The reduced loss of min |x|^2 is theta^2 + (2 - theta)^2, minimized at 1.
spec = ProblemSpec(2, QuadraticObjective(2 * np.eye(2)), AffineEquality([[1.0, 1.0]], [2.0]),
                   partition=part)
rl = ReducedLoss(spec)
for theta in (0.0, 1.0, 2.0):
    print(f"l({theta}) = {rl.value([theta])}, grad = {rl.gradient([theta])[0]}")

# %%
# Nonlinear case: x1 + x2^3 = 9 solved for x2 by Newton's method, with the
# Jacobian dp/dtheta from implicit differentiation.
cubic = ExpressionField(["x1 + x2^3 - 9"])
newton = NewtonCompletion(cubic, part, z0=[2.0])
x = newton.complete([1.0])
print("complete(1) =", x, " residual =", cubic(x))
print("dp/dtheta at 1 =", newton.jacobian([1.0])[0, 0], " expected", -1 / 12)

# %%
# Feasibility holds wherever the completion is evaluated.
rng = np.random.default_rng(0)
nl = ProblemSpec(2, ExpressionFunction("(x1 - 2)^2 + (x2 - 5)^2"),
                 ExpressionField(["x1^2 - x2"]), partition=part)
worst = max(abs(residual_equality(nl, ReducedLoss(nl).complete(rng.normal(size=1)))[0])
            for _ in range(20))
print("worst residual over 20 random theta:", worst)
