#!/usr/bin/env python3
"""
Test expression parsing, evaluation, derivatives and Taylor jets
"""

import math

import numpy as np
import pytest

from src.errors import EvaluationError, ExpressionSyntaxError, PreconditionError
from src.expression_ast import (
    Add, Constant, Cos, Div, Exp, IntPow, Mul, Neg, Sin, Sub, Variable, denominators, derivative,
    evaluate, substitute, to_source
)
from src.expression_parser import parse
from src.function_model import FunctionModel
from src.taylor_jet import taylor_jet


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def test_parse_golden_trees():
    assert parse("i*z") == Mul(Constant(1j), Variable())
    assert parse("z^5*exp(z)") == Mul(IntPow(Variable(), 5), Exp(Variable()))
    assert parse("z^3*(z-1)^3") == Mul(IntPow(Variable(), 3), IntPow(Sub(Variable(), Constant(1)), 3))


def test_power_binds_tighter_than_unary_minus():
    assert parse("-z^2") == Neg(IntPow(Variable(), 2))


def test_operators_are_left_associative():
    assert parse("z-1-2") == Sub(Sub(Variable(), Constant(1)), Constant(2))
    assert evaluate(parse("8/4/2"), 0) == 1


def test_imaginary_literal_juxtaposition():
    assert parse("1+2i") == Add(Constant(1), Constant(2j))
    assert parse(" 2.5i ") == Constant(2.5j)


@pytest.mark.parametrize("source, offset", [
    ("z+", 2),
    ("z $", 2),
    ("log(z)", 0),
    ("z^2.5", 2),
    ("(z", 2),
    ("z+é", 2),
    ("2e-3", 1),
])
def test_syntax_errors_report_byte_offset(source, offset):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse(source)
    assert info.value.offset == offset
    assert info.value.expected


def test_syntax_error_expected_set_for_missing_operand():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse("z*")
    assert 'z' in info.value.expected
    assert '(' in info.value.expected


def test_syntax_error_after_multibyte_character():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse("é")
    assert info.value.offset == 0


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def test_evaluate_known_values():
    assert evaluate(parse("i*z"), 2) == 2j
    assert evaluate(parse("z^3*(z-1)^3"), 2) == 8
    assert evaluate(parse("z^3*(z-1)^3"), 0.5) == pytest.approx(-0.015625, rel=1e-14)


def test_division_by_zero_is_an_evaluation_error():
    with pytest.raises(EvaluationError):
        evaluate(parse("1/z"), 0)


def test_vector_evaluation_matches_scalar():
    f = FunctionModel.from_source("sin(z)*exp(z)/(z+3)")
    zs = np.array([0.1 + 0.2j, -1.5, 2j])
    assert list(f.evaluate_many(zs)) == pytest.approx([f(z) for z in zs], rel=1e-14)


def test_to_source_reparses_to_same_function():
    for source in ["z^3*(z-1)^3", "-z^2+(1+2i)*z", "exp(-z)/(2-z)", "z-(1-z)", "2i*cos(z)^2"]:
        tree = parse(source)
        again = parse(to_source(tree))
        for z in (0.3 + 0.1j, -0.7 + 0.4j):
            assert evaluate(again, z) == pytest.approx(evaluate(tree, z), rel=1e-14)


# ---------------------------------------------------------------------------
# Derivatives
# ---------------------------------------------------------------------------

def test_derivative_known_values():
    assert to_source(derivative(parse("z^2"))) == "2*z"
    assert derivative(parse("exp(z)")) == Exp(Variable())
    assert evaluate(derivative(parse("i*z")), 7) == 1j


def test_function_model_derivative_is_cached():
    f = FunctionModel.from_source("z^3")
    assert f.derivative is f.derivative
    assert f.derivative(2) == pytest.approx(12)


# ---------------------------------------------------------------------------
# Taylor jets
# ---------------------------------------------------------------------------

def test_jet_known_values():
    assert list(taylor_jet(parse("exp(z)"), 0, 3).coefficients) == pytest.approx([1, 1, 0.5, 1 / 6])
    assert list(taylor_jet(parse("z^5*exp(z)"), 0, 7).coefficients) == pytest.approx([0, 0, 0, 0, 0, 1, 1, 0.5])
    assert list(taylor_jet(parse("z^3*(z-1)^3"), 0, 4).coefficients) == pytest.approx([0, 0, 0, -1, 3])


def test_jet_has_truncation_plus_one_coefficients():
    jet = taylor_jet(parse("sin(z)"), 0.5, 9)
    assert jet.truncation == 9
    assert len(jet.coefficients) == 10


def test_jet_needs_positive_truncation():
    with pytest.raises(PreconditionError):
        taylor_jet(parse("z"), 0, 0)


def test_jet_at_pole_is_an_evaluation_error():
    with pytest.raises(EvaluationError):
        taylor_jet(parse("1/(z-1)"), 1, 4)


@pytest.mark.parametrize("source", [
    "sin(z)*exp(2*z)/(z+3)",
    "cos(z^2)-z^4",
    "(1+2i)*z^3/(1-z)",
])
def test_jet_matches_repeated_derivatives(source):
    tree = parse(source)
    base = 0.3 + 0.2j
    jet = taylor_jet(tree, base, 8)
    current = tree
    for k in range(5):
        expected = evaluate(current, base)
        assert math.factorial(k) * jet[k] == pytest.approx(expected, rel=1e-9, abs=1e-12)
        current = derivative(current)


def random_tree(rng, depth: int):
    """Random entire expression tree (division only by exponentials)"""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.6:
            return Variable()
        return Constant(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))
    kind = int(rng.integers(9))
    if kind < 3:
        node = (Add, Sub, Mul)[kind]
        return node(random_tree(rng, depth - 1), random_tree(rng, depth - 1))
    if kind == 3:
        return IntPow(random_tree(rng, depth - 1), int(rng.integers(0, 4)))
    if kind == 4:
        return Div(random_tree(rng, depth - 1), Exp(random_tree(rng, depth - 1)))
    if kind == 5:
        return Neg(random_tree(rng, depth - 1))
    return (Exp, Sin, Cos)[kind - 6](random_tree(rng, depth - 1))


@pytest.mark.parametrize("seed", range(8))
def test_jet_matches_repeated_derivatives_for_random_trees(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng, 3)
    base = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
    jet = taylor_jet(tree, base, 8)

    current, expected = tree, []
    for _ in range(5):
        expected.append(evaluate(current, base))
        current = derivative(current)
    actual = [math.factorial(k) * jet[k] for k in range(5)]
    scale = max([1.0] + [abs(v) for v in expected])
    for a, b in zip(actual, expected):
        assert abs(a - b) <= 1e-9 * scale


@pytest.mark.parametrize("source", ["z^5*exp(z)", "z^3*(z-1)^3", "sin(z)*exp(2*z)/(z+3)"])
def test_real_parts_match_complex_power(source):
    rng = np.random.default_rng(7)
    jet = taylor_jet(parse(source), 0.3 + 0.2j, 8)
    for _ in range(20):
        x, y = rng.uniform(-1, 1, 2)
        for k in range(6):
            f1, f2 = jet.real_parts(k, x, y)
            value = jet[k] * complex(x, y) ** k
            assert abs(f1 - value.real) < 1e-10
            assert abs(f2 - value.imag) < 1e-10


def test_real_parts_sum_to_function():
    f = FunctionModel.from_source("sin(z)*exp(2*z)/(z+3)")
    base = 0.3 + 0.2j
    jet = f.jet(base)
    for w in (0.1, 0.07j, -0.05 + 0.08j):
        parts = [jet.real_parts(k, w.real, w.imag) for k in range(jet.truncation + 1)]
        value = f(base + w)
        assert sum(p[0] for p in parts) == pytest.approx(value.real, abs=1e-12)
        assert sum(p[1] for p in parts) == pytest.approx(value.imag, abs=1e-12)


def test_jet_of_product_is_truncated_convolution():
    f, g = parse("3*z^4-z+2i"), parse("z^3+(1-i)*z^2-5")
    base = -0.4 + 0.9j
    a = taylor_jet(f, base, 10).as_array()
    b = taylor_jet(g, base, 10).as_array()
    product = taylor_jet(Mul(f, g), base, 10).as_array()
    assert product == pytest.approx(np.convolve(a, b)[:11], rel=1e-12, abs=1e-12)


def test_jet_is_shift_consistent():
    tree = parse("z^3*(z-1)^3+exp(z)")
    a = 0.6 - 0.25j
    shifted = substitute(tree, Add(Variable(), Constant(a)))
    assert list(taylor_jet(tree, a, 12).coefficients) == pytest.approx(
        list(taylor_jet(shifted, 0, 12).coefficients), rel=1e-12, abs=1e-12)


def test_negligible_coefficients_are_scale_relative():
    jet = FunctionModel.from_source("1000*z^2").jet(0)
    assert jet.is_negligible(1)
    assert not jet.is_negligible(2)


# ---------------------------------------------------------------------------
# Function model
# ---------------------------------------------------------------------------

def test_negated_and_scaled_models():
    f = FunctionModel.from_source("z^2+1")
    assert f.negated()(2) == -5
    assert f.scaled(2j)(1) == 4j


def test_has_division():
    assert FunctionModel.from_source("z/(z+3)").has_division
    assert not FunctionModel.from_source("z^5*exp(z)").has_division


def test_denominators_are_distinct_and_non_constant():
    tree = parse("z/(z-1) + 1/(z*z) + z/2 + 3/(z-1)")
    assert denominators(tree) == [parse("z-1"), parse("z*z")]
    assert denominators(parse("z^5*exp(z)")) == []


if __name__ == "__main__":
    exit(pytest.main([__file__, "-v"]))
