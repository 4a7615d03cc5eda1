"""Shared problem builders."""
import numpy as np
import pytest

from htopt import (AffineEquality, ExpressionField, ExpressionFunction,
                   PenaltyWeights, ProblemSpec, QuadraticObjective, ReducedLoss,
                   VariablePartition, NewtonCompletion)


def qp_equality_spec(**kw):
    """min |x|^2 s.t. x1 + x2 = 2, x2 dependent."""
    return ProblemSpec(2, QuadraticObjective(2 * np.eye(2)), AffineEquality([[1.0, 1.0]], [2.0]),
                       partition=VariablePartition(2, (1,)), smoothness=2.0,
                       strong_convexity=2.0, name="qp_equality", **kw)


def qp_ineq_spec(bound=0.8):
    return qp_equality_spec(inequality=ExpressionField([f"x1 - {bound}"]))


def parabola_spec(inequality=None):
    return ProblemSpec(2, ExpressionFunction("(x1 - 2)^2 + (x2 - 5)^2"),
                       ExpressionField(["x1^2 - x2"]), inequality=inequality,
                       partition=VariablePartition(2, (1,)), name="parabola")


def cubic_spec():
    return ProblemSpec(2, ExpressionFunction("(x1 - 1)^2 + (x2 - 2)^2"),
                       ExpressionField(["x1 + x2^3 - 9"]),
                       partition=VariablePartition(2, (1,)), name="cubic")


@pytest.fixture
def qp_rl():
    return ReducedLoss(qp_equality_spec())


@pytest.fixture
def qp_ineq_rl():
    return ReducedLoss(qp_ineq_spec())


@pytest.fixture
def parabola_rl():
    return ReducedLoss(parabola_spec())


@pytest.fixture
def cubic_rl():
    spec = cubic_spec()
    return ReducedLoss(spec, completion=NewtonCompletion(spec.equality, spec.partition, z0=[2.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


WEIGHTS = PenaltyWeights()


# --- acceptance report ------------------------------------------------------------

ACCEPTANCE_LINES = {}


def report(number, title, passed, detail):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title} | {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
