import numpy as np
import pytest

from htopt import (AffineEquality, ConvexRegionSpec, ExpressionField, ExpressionFunction,
                   ProblemSpec, QuadraticObjective, VariablePartition, residual_equality,
                   residual_inequality, validate)
from htopt.problem import central_gradient, default_partition

from conftest import parabola_spec, qp_equality_spec


def _affine(A, b, dependent, n=2):
    return ProblemSpec(n, QuadraticObjective(np.eye(n)), AffineEquality(A, b),
                       partition=VariablePartition(n, dependent))


@pytest.mark.parametrize("x, expected", [((1, 1), [0.0]), ((0, 0), [-2.0])])
def test_residual_equality_affine(x, expected):
    np.testing.assert_array_equal(residual_equality(qp_equality_spec(), np.array(x, float)), expected)


def test_residual_equality_nonlinear():
    np.testing.assert_array_equal(residual_equality(parabola_spec(), np.array([2.0, 4.0])), [0.0])


@pytest.mark.parametrize("exprs, x, expected", [
    (["x1 - 1"], (0, 0), [-1.0]),
    (["x1 - 1"], (2, 0), [1.0]),
    (["x1 - 1", "-x2"], (1, 0), [0.0, 0.0]),
])
def test_residual_inequality(exprs, x, expected):
    spec = qp_equality_spec(inequality=ExpressionField(exprs))
    np.testing.assert_array_equal(residual_inequality(spec, np.array(x, float)), expected)


def test_residual_inequality_absent():
    with pytest.raises(ValueError):
        residual_inequality(qp_equality_spec(), np.zeros(2))


def test_residual_dimension_mismatch():
    with pytest.raises(ValueError):
        residual_equality(qp_equality_spec(), np.zeros(3))


def test_validate_clean():
    assert validate(_affine([[1, 1]], [2], (1,))) == []


def test_validate_singular_block():
    diags = validate(_affine([[1, 0]], [1], (1,)))
    assert [d.code for d in diags] == ["singular-dependent-block"]
    assert "2" in diags[0].message  # 1-based column named


def test_validate_overdetermined():
    spec = ProblemSpec(2, QuadraticObjective(np.eye(2)),
                       AffineEquality(np.eye(3)[:, :2], [1, 2, 3]))
    assert "overdetermined" in [d.code for d in validate(spec)]


def test_validate_partition_count():
    spec = ProblemSpec(3, QuadraticObjective(np.eye(3)), AffineEquality([[1, 1, 1]], [1]),
                       partition=VariablePartition(3, (0, 1)))
    assert [d.code for d in validate(spec)] == ["partition-count"]


def test_validate_is_pure():
    spec = _affine([[1, 0]], [1], (1,))
    assert validate(spec) == validate(spec)


def test_partition_invariants():
    part = VariablePartition(5, (3, 0))
    assert sorted(part.independent + part.dependent) == list(range(5))
    assert part.n_free == 3
    x = np.arange(5.0)
    theta, z = part.split(x)
    np.testing.assert_array_equal(part.assemble(theta, z), x)
    with pytest.raises(ValueError):
        VariablePartition(3, (1, 1))
    with pytest.raises(ValueError):
        VariablePartition(3, (3,))


def test_default_partition_avoids_zero_column():
    part = default_partition([[0.0, 1e-3, 5.0]])
    assert part.dependent == (2,)


def test_nonlinear_needs_partition():
    with pytest.raises(ValueError):
        ProblemSpec(2, ExpressionFunction("x1"), ExpressionField(["x1^2 - x2"]))


def test_region_invariants():
    with pytest.raises(ValueError):
        ConvexRegionSpec.box([1.0], [0.0])
    with pytest.raises(ValueError):
        ConvexRegionSpec.ball([0.0], 0.0)
    box = ConvexRegionSpec.box([0, 1, 2], [1, 2, 3]).restrict((0, 2))
    np.testing.assert_array_equal(box.lower, [0, 2])


def test_fields_differentiable(rng):
    """Field gradients agree with central differences at sampled points."""
    f = ExpressionFunction("exp(0.3*x1) * cos(x2) + x1^2 * x2")
    for _ in range(10):
        x = rng.normal(size=2)
        np.testing.assert_allclose(f.gradient(x), central_gradient(f, x), rtol=1e-6, atol=1e-8)
