"""
Problems from text
==================

Objectives and constraints can be written as expressions over ``x1 .. xn``.
This script parses a few, evaluates them, and loads a shipped problem file.
"""

import numpy as np

from htopt import ParseFailure, evaluate, parse, to_string
from htopt.expression import gradient
from htopt.problemfile import library, library_path, load_problem

# %%
# Precedence: ``^`` binds tighter than unary minus, which binds tighter
# than ``*`` and ``/``. The canonical printout makes the grouping visible.
for text in ["x1^2 + x2^2", "-x1^2", "2^3^2", "log(1 + exp(x1))"]:
    tree = parse(text)
    print(f"{text:20s} -> {to_string(tree):40s} at (1, 2): {evaluate(tree, np.array([1.0, 2.0]))}")

# %%
# Gradients come from a reverse sweep over the tree.
print("grad of x1^2 * x2 at (3, 2):", gradient(parse("x1^2 * x2"), np.array([3.0, 2.0])))

# %%
# Malformed input names the 1-based character position.
try:
    parse("(x1")
except ParseFailure as exc:
    print("ParseFailure:", exc)

# %%
# Non-finite values propagate instead of raising.
print("x1/x2 at (1, 0):", evaluate(parse("x1/x2"), np.array([1.0, 0.0])))

# %%
# The shipped library. ``qp_equality`` is min |x|^2 subject to x1 + x2 = 2.
spec = load_problem(library_path("qp_equality"))
print("qp_equality: n =", spec.n, " A =", spec.equality.A.tolist(), " b =", spec.equality.b.tolist())
for name, pf in library().items():
    print(f"  {name:20s} algorithm={pf.algorithm}  n={pf.spec.n}  m={pf.spec.m}")
