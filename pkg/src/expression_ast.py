#!/usr/bin/env python3
"""
Expression AST Module
Immutable expression trees for holomorphic right-hand sides F(z),
with evaluation, symbolic differentiation and substitution
"""

import cmath
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .errors import EvaluationError

ComplexValue = complex

# Denominators with smaller modulus are treated as poles
POLE_MODULUS = 1e-300


@dataclass(frozen=True)
class Constant:
    value: complex

    def __post_init__(self):
        value = complex(self.value)
        if not cmath.isfinite(value):
            raise ValueError(f"Constant must be finite, got {value!r}")
        object.__setattr__(self, 'value', value)


@dataclass(frozen=True)
class Variable:
    pass


@dataclass(frozen=True)
class Neg:
    arg: 'ExprAst'


@dataclass(frozen=True)
class Add:
    left: 'ExprAst'
    right: 'ExprAst'


@dataclass(frozen=True)
class Sub:
    left: 'ExprAst'
    right: 'ExprAst'


@dataclass(frozen=True)
class Mul:
    left: 'ExprAst'
    right: 'ExprAst'


@dataclass(frozen=True)
class Div:
    left: 'ExprAst'
    right: 'ExprAst'


@dataclass(frozen=True)
class IntPow:
    base: 'ExprAst'
    exponent: int

    def __post_init__(self):
        if isinstance(self.exponent, bool) or not isinstance(self.exponent, int) or self.exponent < 0:
            raise ValueError(f"IntPow exponent must be a non-negative integer, got {self.exponent!r}")


@dataclass(frozen=True)
class Exp:
    arg: 'ExprAst'


@dataclass(frozen=True)
class Sin:
    arg: 'ExprAst'


@dataclass(frozen=True)
class Cos:
    arg: 'ExprAst'


ExprAst = Union[Constant, Variable, Neg, Add, Sub, Mul, Div, IntPow, Exp, Sin, Cos]

BINARY_NODES = (Add, Sub, Mul, Div)
UNARY_FUNCTIONS = {Exp: 'exp', Sin: 'sin', Cos: 'cos'}

ZERO = Constant(0)
ONE = Constant(1)


def children(node: ExprAst) -> tuple:
    """Child nodes in evaluation order"""
    if isinstance(node, BINARY_NODES):
        return (node.left, node.right)
    if isinstance(node, IntPow):
        return (node.base,)
    if isinstance(node, (Neg, Exp, Sin, Cos)):
        return (node.arg,)
    return ()


def contains_division(node: ExprAst) -> bool:
    """True if any Div node occurs in the tree"""
    if isinstance(node, Div):
        return True
    return any(contains_division(child) for child in children(node))


def denominators(node: ExprAst) -> list:
    """Distinct non-constant Div denominators, outermost first"""
    found = []
    pending = [node]
    while pending:
        current = pending.pop(0)
        if isinstance(current, Div) and not is_constant(current.right) and current.right not in found:
            found.append(current.right)
        pending.extend(children(current))
    return found


def is_constant(node: ExprAst) -> bool:
    """True if the variable z does not occur in the tree"""
    if isinstance(node, Variable):
        return False
    return all(is_constant(child) for child in children(node))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _check_denominator(value):
    smallest = np.min(np.abs(value)) if isinstance(value, np.ndarray) else abs(value)
    if smallest < POLE_MODULUS:
        raise EvaluationError("Division by a value of modulus below 1e-300")
    return value


def _build(node: ExprAst, lib) -> Callable:
    """Translate a tree into nested closures over cmath or numpy"""
    if isinstance(node, Constant):
        value = node.value
        return lambda z: value
    if isinstance(node, Variable):
        return lambda z: z
    if isinstance(node, Neg):
        arg = _build(node.arg, lib)
        return lambda z: -arg(z)
    if isinstance(node, IntPow):
        base = _build(node.base, lib)
        n = node.exponent
        if n == 0:
            return lambda z: 1 + 0j
        if n == 1:
            return base
        return lambda z: base(z) ** n
    if isinstance(node, (Exp, Sin, Cos)):
        arg = _build(node.arg, lib)
        fn = getattr(lib, UNARY_FUNCTIONS[type(node)])
        return lambda z: fn(arg(z))

    left = _build(node.left, lib)
    right = _build(node.right, lib)
    if isinstance(node, Add):
        return lambda z: left(z) + right(z)
    if isinstance(node, Sub):
        return lambda z: left(z) - right(z)
    if isinstance(node, Mul):
        return lambda z: left(z) * right(z)
    if isinstance(node, Div):
        return lambda z: left(z) / _check_denominator(right(z))
    raise TypeError(f"Unknown expression node: {node!r}")


@lru_cache(maxsize=256)
def compile_scalar(node: ExprAst) -> Callable[[complex], complex]:
    """
    Compile an expression into a fast scalar evaluator

    Args:
        node: Expression tree

    Returns:
        Callable mapping a complex number to F(z); raises EvaluationError on
        poles, overflow and non-finite results
    """
    raw = _build(node, cmath)

    def evaluate_scalar(z: complex) -> complex:
        try:
            value = complex(raw(complex(z)))
        except (OverflowError, ZeroDivisionError) as e:
            raise EvaluationError(f"Evaluation failed: {e}", complex(z)) from e
        except EvaluationError as e:
            raise EvaluationError(str(e), complex(z)) from e
        if not cmath.isfinite(value):
            raise EvaluationError("Non-finite value", complex(z))
        return value

    return evaluate_scalar


@lru_cache(maxsize=256)
def compile_vector(node: ExprAst) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an expression into a numpy evaluator over complex arrays"""
    raw = _build(node, np)

    def evaluate_array(zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        with np.errstate(all='ignore'):
            values = np.array(np.broadcast_to(raw(zs), zs.shape), dtype=complex)
        if not np.all(np.isfinite(values)):
            raise EvaluationError("Non-finite value on sample array")
        return values

    return evaluate_array


def evaluate(f: ExprAst, z: ComplexValue) -> ComplexValue:
    """Value of the expression at z"""
    return compile_scalar(f)(z)


# ---------------------------------------------------------------------------
# Symbolic manipulation
# ---------------------------------------------------------------------------

def _add(a: ExprAst, b: ExprAst) -> ExprAst:
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value + b.value)
    return Add(a, b)


def _sub(a: ExprAst, b: ExprAst) -> ExprAst:
    if b == ZERO:
        return a
    if a == ZERO:
        return _neg(b)
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value - b.value)
    return Sub(a, b)


def _mul(a: ExprAst, b: ExprAst) -> ExprAst:
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value * b.value)
    if isinstance(b, Constant):
        return Mul(b, a)
    return Mul(a, b)


def _neg(a: ExprAst) -> ExprAst:
    if isinstance(a, Constant):
        return Constant(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _pow(base: ExprAst, n: int) -> ExprAst:
    if n == 0:
        return ONE
    if n == 1:
        return base
    return IntPow(base, n)


def derivative(f: ExprAst) -> ExprAst:
    """
    Symbolic derivative dF/dz

    Args:
        f: Expression tree

    Returns:
        Expression tree of the derivative, with trivial zero/one factors folded
    """
    if isinstance(f, Constant):
        return ZERO
    if isinstance(f, Variable):
        return ONE
    if isinstance(f, Neg):
        return _neg(derivative(f.arg))
    if isinstance(f, Add):
        return _add(derivative(f.left), derivative(f.right))
    if isinstance(f, Sub):
        return _sub(derivative(f.left), derivative(f.right))
    if isinstance(f, Mul):
        return _add(_mul(derivative(f.left), f.right), _mul(f.left, derivative(f.right)))
    if isinstance(f, Div):
        numerator = _sub(_mul(derivative(f.left), f.right), _mul(f.left, derivative(f.right)))
        return Div(numerator, _pow(f.right, 2)) if numerator != ZERO else ZERO
    if isinstance(f, IntPow):
        n = f.exponent
        if n == 0:
            return ZERO
        return _mul(_mul(Constant(n), _pow(f.base, n - 1)), derivative(f.base))
    if isinstance(f, Exp):
        return _mul(f, derivative(f.arg))
    if isinstance(f, Sin):
        return _mul(Cos(f.arg), derivative(f.arg))
    if isinstance(f, Cos):
        return _mul(_neg(Sin(f.arg)), derivative(f.arg))
    raise TypeError(f"Unknown expression node: {f!r}")


def substitute(f: ExprAst, replacement: ExprAst) -> ExprAst:
    """Replace every occurrence of the variable z by another tree"""
    if isinstance(f, Variable):
        return replacement
    if isinstance(f, Constant):
        return f
    if isinstance(f, BINARY_NODES):
        return type(f)(substitute(f.left, replacement), substitute(f.right, replacement))
    if isinstance(f, IntPow):
        return IntPow(substitute(f.base, replacement), f.exponent)
    return type(f)(substitute(f.arg, replacement))


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PRECEDENCE = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, IntPow: 4}


def _format_real(x: float) -> str:
    text = repr(float(x))
    if 'e' in text or 'E' in text:
        text = f"{x:.20f}".rstrip('0').rstrip('.')
    if text.endswith('.0'):
        text = text[:-2]
    return text


def _format_constant(value: complex) -> str:
    re_part, im_part = value.real, value.imag
    if im_part == 0:
        return _format_real(re_part) if re_part >= 0 else f"(-{_format_real(-re_part)})"
    imag = 'i' if abs(im_part) == 1 else f"{_format_real(abs(im_part))}i"
    if re_part == 0:
        return imag if im_part > 0 else f"(-{imag})"
    sign = '+' if im_part > 0 else '-'
    real = _format_real(re_part) if re_part >= 0 else f"-{_format_real(-re_part)}"
    return f"({real}{sign}{imag})"


def to_source(f: ExprAst, parent_precedence: int = 0) -> str:
    """Render a tree back to grammar text"""
    if isinstance(f, Constant):
        return _format_constant(f.value)
    if isinstance(f, Variable):
        return 'z'
    if isinstance(f, (Exp, Sin, Cos)):
        return f"{UNARY_FUNCTIONS[type(f)]}({to_source(f.arg)})"

    precedence = _PRECEDENCE[type(f)]
    if isinstance(f, Neg):
        text = f"-{to_source(f.arg, precedence)}"
    elif isinstance(f, IntPow):
        text = f"{to_source(f.base, precedence + 1)}^{f.exponent}"
    else:
        symbol = {Add: '+', Sub: '-', Mul: '*', Div: '/'}[type(f)]
        # Right operand binds tighter so left-associativity survives a reparse
        text = f"{to_source(f.left, precedence)}{symbol}{to_source(f.right, precedence + 1)}"
    return f"({text})" if precedence < parent_precedence else text
