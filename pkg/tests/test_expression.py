import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from htopt.expression import (BinOp, Const, Func, ParseFailure, Var, compile_expr,
                              evaluate, gradient, parse, to_string, variables)


@pytest.mark.parametrize("text, x, expected", [
    ("x1^2 + x2^2", (1, 2), 5.0),
    ("log(1 + exp(x1))", (0,), 0.6931471805599453),
    ("2*x1 - x2", (3, 1), 5.0),
])
def test_documented_values(text, x, expected):
    assert evaluate(parse(text), np.array(x, float)) == expected


def test_unbalanced_paren_position():
    with pytest.raises(ParseFailure) as info:
        parse("(x1")
    assert info.value.position == 4


@pytest.mark.parametrize("text", ["x1 +", "foo(x1)", "x1 x2", "y1", "x1)", "", "2 ** 3", "x0"])
def test_rejects_malformed(text):
    with pytest.raises(ParseFailure) as info:
        parse(text)
    assert 1 <= info.value.position <= len(text) + 1


def test_division_by_zero_propagates():
    assert evaluate(parse("x1/x2"), np.array([1.0, 0.0])) == math.inf


def test_log_of_negative_is_nan():
    assert math.isnan(evaluate(parse("log(x1)"), np.array([-1.0])))


def test_trig_identity():
    assert abs(evaluate(parse("sin(x1)^2 + cos(x1)^2"), np.array([0.7])) - 1.0) <= 1e-15


@pytest.mark.parametrize("text, expected", [
    ("2^3^2", 512.0),       # right associative
    ("-2^2", -4.0),         # power binds tighter than negation
    ("2^-1", 0.5),
    ("8/4/2", 1.0),         # left associative
    ("1 - 2 - 3", -4.0),
    ("2 + 3*4", 14.0),
    ("(2 + 3)*4", 20.0),
    ("--3", 3.0),
    ("sqrt(16) + abs(-2)", 6.0),
    ("1.5e2", 150.0),
])
def test_precedence(text, expected):
    assert evaluate(parse(text), np.zeros(1)) == expected


def test_whitespace_insensitive():
    assert parse(" x1 *\t(x2+ 3 ) ") == parse("x1*(x2+3)")


def test_index_out_of_range():
    with pytest.raises(IndexError):
        evaluate(parse("x3"), np.zeros(2))


def test_variables():
    assert variables(parse("x1 + sin(x4) * x2")) == {1, 2, 4}


# --- random trees -----------------------------------------------------------

_leaf = st.one_of(
    st.integers(1, 3).map(Var),
    st.sampled_from([0.5, 1.0, 2.0, 3.0, 0.25]).map(Const),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*"), children, children).map(lambda t: BinOp(*t)),
        st.tuples(children, st.sampled_from([2.0, 3.0])).map(lambda t: BinOp("^", t[0], Const(t[1]))),
        children.map(lambda c: Func("neg", c)),
    )


polynomials = st.recursive(_leaf, _extend, max_leaves=20)

_any_extend = lambda children: st.one_of(  # noqa: E731
    _extend(children),
    st.tuples(st.sampled_from(["exp", "sin", "cos", "abs", "log", "sqrt"]), children)
      .map(lambda t: Func(*t)),
    st.tuples(children, children).map(lambda t: BinOp("/", *t)),
)
any_trees = st.recursive(_leaf, _any_extend, max_leaves=20)


def _depth(t):
    if isinstance(t, (Const, Var)):
        return 0
    if isinstance(t, Func):
        return 1 + _depth(t.arg)
    return 1 + max(_depth(t.left), _depth(t.right))


@settings(max_examples=200, deadline=None)
@given(any_trees)
def test_print_parse_idempotent(tree):
    once = parse(to_string(tree))
    assert parse(to_string(once)) == once
    # random trees contain only nonnegative constants, so the first cycle is exact
    assert once == tree


@settings(max_examples=200, deadline=None)
@given(any_trees, st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_compiled_matches_interpreter(tree, x):
    x = np.array(x)
    a = evaluate(tree, x)
    with np.errstate(all="ignore"):
        b = float(compile_expr(tree)(x))
    assert (a == b) or (math.isnan(a) and math.isnan(b))


def _fd(tree, x, i, h):
    e = np.zeros_like(x)
    e[i] = h
    return (evaluate(tree, x + e) - evaluate(tree, x - e)) / (2 * h)


@settings(max_examples=300, deadline=None)
@given(polynomials.filter(lambda t: _depth(t) <= 6),
       st.lists(st.floats(-1.5, 1.5), min_size=3, max_size=3))
def test_polynomial_gradient_matches_finite_differences(tree, x):
    x = np.array(x)
    g = gradient(tree, x)
    scale = max(1.0, abs(evaluate(tree, x)))
    for i in range(3):
        # Richardson-extrapolated central difference, accurate to O(h^4)
        h = 1e-3
        fd = (4 * _fd(tree, x, i, h / 2) - _fd(tree, x, i, h)) / 3
        # relative error against the derivative, with the value scale as floor
        assert abs(fd - g[i]) <= 1e-6 * max(abs(g[i]), scale)


def test_gradient_examples():
    np.testing.assert_allclose(gradient(parse("x1^2 + x2^2"), np.array([1.0, 2.0])), [2, 4])
    np.testing.assert_allclose(gradient(parse("exp(x1) * sin(x2)"), np.array([0.0, 0.3])),
                               [np.sin(0.3), np.cos(0.3)])
    np.testing.assert_allclose(gradient(parse("x1 ^ x2"), np.array([2.0, 3.0])),
                               [12.0, 8.0 * np.log(2.0)])
