import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from cfprobe.funcmodel.expr import (
    VAR,
    Abs,
    Add,
    Const,
    Cos,
    Div,
    Exp,
    ExprError,
    Mul,
    Neg,
    NotDifferentiable,
    Pow,
    Sin,
    Sub,
    derivatives,
    differentiate,
    evaluate_tree,
    parse_expression,
    to_text,
)


@pytest.mark.parametrize(
    "text, tree",
    [
        ("exp(-t^2/2)", Exp(Neg(Div(Pow(VAR, 2), Const(2))))),
        ("cos(2*t)", Cos(Mul(Const(2), VAR))),
        ("1/(1+t^2)", Div(Const(1), Add(Const(1), Pow(VAR, 2)))),
        ("t^-2", Pow(VAR, -2)),
        ("2*pi", Mul(Const(2), Const(math.pi))),
        ("abs(t) - 1", Sub(Abs(VAR), Const(1))),
    ],
)
def test_parse_examples(text, tree):
    assert parse_expression(text) == tree


@pytest.mark.parametrize(
    "text, fragment, position",
    [
        ("exp(-t^1.5)", "non-integer exponent", 7),
        ("exp(-t^2", "expected ')'", 8),
        ("t +* 2", "unexpected", 3),
        ("log(t)", "unknown name", 0),
        ("t $ 2", "", 2),
    ],
)
def test_parse_errors_carry_position(text, fragment, position):
    with pytest.raises(ExprError) as info:
        parse_expression(text)
    assert fragment in str(info.value)
    assert info.value.position == position


# parser-reachable trees: constants are nonnegative (a minus sign parses as Neg/Sub)
leaves = st.one_of(st.just(VAR), st.floats(0, 10, allow_nan=False).map(Const))


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda p: Add(*p)),
        st.tuples(children, children).map(lambda p: Sub(*p)),
        st.tuples(children, children).map(lambda p: Mul(*p)),
        st.tuples(children, children).map(lambda p: Div(*p)),
        st.tuples(children, st.integers(-3, 4)).map(lambda p: Pow(*p)),
        children.map(Neg),
        children.map(Exp),
        children.map(Cos),
        children.map(Sin),
    )


trees = st.recursive(leaves, _extend, max_leaves=8)


@given(trees)
def test_print_parse_round_trip(tree):
    assert parse_expression(to_text(tree)) == tree


def test_differentiate_examples():
    t = np.linspace(-3, 3, 13)
    gauss = parse_expression("exp(-t^2/2)")
    np.testing.assert_allclose(evaluate_tree(differentiate(gauss, 1), t), -t * np.exp(-t * t / 2), atol=1e-15)
    np.testing.assert_allclose(evaluate_tree(differentiate(Cos(VAR), 2), t), -np.cos(t), atol=1e-15)
    with pytest.raises(NotDifferentiable):
        differentiate(Abs(VAR), 1)


# smooth trees for derivative checks: bounded arguments keep exp from overflowing
smooth_leaves = st.one_of(st.just(VAR), st.floats(0.1, 3).map(Const))


def _smooth(children):
    return st.one_of(
        st.tuples(children, children).map(lambda p: Add(*p)),
        st.tuples(children, children).map(lambda p: Mul(*p)),
        st.tuples(children, st.integers(0, 3)).map(lambda p: Pow(*p)),
        children.map(lambda c: Exp(Sin(c))),
        children.map(Cos),
        children.map(Sin),
        children.map(lambda c: Div(Const(1), Add(Const(1), Pow(c, 2)))),
    )


smooth_trees = st.recursive(smooth_leaves, _smooth, max_leaves=6)


@given(smooth_trees, st.floats(-2, 2))
def test_symbolic_derivative_matches_central_difference(tree, t0):
    h = np.cbrt(np.finfo(float).eps) * max(1.0, abs(t0))
    f = lambda x: float(evaluate_tree(tree, np.array(x)))  # noqa: E731
    fd = (-f(t0 + 2 * h) + 8 * f(t0 + h) - 8 * f(t0 - h) + f(t0 - 2 * h)) / (12 * h)
    exact = float(evaluate_tree(differentiate(tree, 1), np.array(t0)))
    scale = max(1.0, abs(exact), max(abs(f(t0 + k * h)) for k in (-2, -1, 1, 2)))
    assume(math.isfinite(exact) and scale < 1e6)
    assert abs(fd - exact) <= 1e-6 * scale


@given(smooth_trees, st.integers(0, 4))
def test_jets_match_symbolic_derivatives(tree, order):
    t = np.linspace(-1.5, 1.5, 7)
    jets = derivatives(tree, t, order)
    for k in range(order + 1):
        exact = evaluate_tree(differentiate(tree, k), t)
        np.testing.assert_allclose(jets[k], exact, rtol=1e-9, atol=1e-9 * max(1.0, np.abs(exact).max()))


def test_high_order_jets_of_the_gaussian():
    # Hermite: d^n/dt^n exp(-t^2/2) = (-1)^n He_n(t) exp(-t^2/2)
    t = np.linspace(-4, 4, 17)
    jets = derivatives(parse_expression("exp(-t^2/2)"), t, 11)
    for n in range(12):
        he = np.polynomial.hermite_e.hermeval(t, [0] * n + [1])
        np.testing.assert_allclose(jets[n], (-1) ** n * he * np.exp(-t * t / 2), rtol=1e-12, atol=1e-12)
