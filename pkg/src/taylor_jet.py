#!/usr/bin/env python3
"""
Taylor Jet Module
Truncated power series propagated through an expression tree
"""

import cmath
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import EvaluationError, PreconditionError
from .expression_ast import (
    POLE_MODULUS, Add, Constant, Cos, Div, Exp, ExprAst, IntPow, Mul, Neg, Sin, Sub, Variable
)

DEFAULT_TRUNCATION = 32
NEGLIGIBLE_RATIO = 1e-10


@dataclass(frozen=True)
class Jet:
    """Coefficients c_0..c_K of F(base + w) = sum c_k w^k"""

    base: complex
    coefficients: Tuple[complex, ...]

    @property
    def truncation(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, k: int) -> complex:
        return self.coefficients[k]

    def scale(self) -> float:
        """Reference magnitude for negligibility tests"""
        return max(1.0, max(abs(c) for c in self.coefficients))

    def is_negligible(self, k: int) -> bool:
        return abs(self.coefficients[k]) <= NEGLIGIBLE_RATIO * self.scale()

    def as_array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=complex)

    def real_parts(self, k: int, x: float, y: float) -> Tuple[float, float]:
        """Degree-k homogeneous parts of Re F and Im F at (x, y) relative to the base"""
        return homogeneous_parts(self.coefficients[k], k, x, y)

    def evaluate(self, w: complex, start: int = 0) -> complex:
        """Partial sum sum_{k >= start} c_k w^k (Horner)"""
        total = 0j
        for c in reversed(self.coefficients[start:]):
            total = total * w + c
        return total * w ** start


def homogeneous_parts(c: complex, k: int, x: float, y: float) -> Tuple[float, float]:
    """
    Real and imaginary parts of c (x + iy)^k as real polynomials in x, y

    Args:
        c: Taylor coefficient c_k
        k: Degree
        x, y: Real coordinates

    Returns:
        (F1, F2) with F1 + i F2 = c (x + iy)^k, summed over the binomial terms
    """
    f1 = f2 = 0.0
    for j in range(k + 1):
        weight = math.comb(k, j) * x ** (k - j) * y ** j
        rotated = c * 1j ** j
        f1 += weight * rotated.real
        f2 += weight * rotated.imag
    return f1, f2


def _product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[:len(a)]


def _power(a: np.ndarray, n: int) -> np.ndarray:
    result = np.zeros_like(a)
    result[0] = 1.0
    square = a
    while n:
        if n & 1:
            result = _product(result, square)
        n >>= 1
        if n:
            square = _product(square, square)
    return result


def _quotient(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if abs(b[0]) < POLE_MODULUS:
        raise EvaluationError("Series division by a denominator vanishing at the base point")
    q = np.zeros_like(a)
    for k in range(len(a)):
        q[k] = (a[k] - np.dot(b[1:k + 1], q[k - 1::-1][:k])) / b[0]
    return q


def _exponential(u: np.ndarray) -> np.ndarray:
    e = np.zeros_like(u)
    e[0] = cmath.exp(u[0])
    weighted = u * np.arange(len(u))
    for k in range(1, len(u)):
        e[k] = np.dot(weighted[1:k + 1], e[k - 1::-1][:k]) / k
    return e


def _sine_cosine(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    s = np.zeros_like(u)
    c = np.zeros_like(u)
    s[0] = cmath.sin(u[0])
    c[0] = cmath.cos(u[0])
    weighted = u * np.arange(len(u))
    for k in range(1, len(u)):
        s[k] = np.dot(weighted[1:k + 1], c[k - 1::-1][:k]) / k
        c[k] = -np.dot(weighted[1:k + 1], s[k - 1::-1][:k]) / k
    return s, c


def _propagate(node: ExprAst, base: complex, size: int) -> np.ndarray:
    if isinstance(node, Constant):
        series = np.zeros(size, dtype=complex)
        series[0] = node.value
        return series
    if isinstance(node, Variable):
        series = np.zeros(size, dtype=complex)
        series[0] = base
        if size > 1:
            series[1] = 1.0
        return series
    if isinstance(node, Neg):
        return -_propagate(node.arg, base, size)
    if isinstance(node, IntPow):
        return _power(_propagate(node.base, base, size), node.exponent)
    if isinstance(node, Exp):
        return _exponential(_propagate(node.arg, base, size))
    if isinstance(node, (Sin, Cos)):
        s, c = _sine_cosine(_propagate(node.arg, base, size))
        return s if isinstance(node, Sin) else c

    left = _propagate(node.left, base, size)
    right = _propagate(node.right, base, size)
    if isinstance(node, Add):
        return left + right
    if isinstance(node, Sub):
        return left - right
    if isinstance(node, Mul):
        return _product(left, right)
    if isinstance(node, Div):
        return _quotient(left, right)
    raise TypeError(f"Unknown expression node: {node!r}")


def taylor_jet(f: ExprAst, base: complex, truncation: int = DEFAULT_TRUNCATION) -> Jet:
    """
    Taylor coefficients of F at a base point

    Args:
        f: Expression tree
        base: Expansion point
        truncation: Highest power K (K >= 1)

    Returns:
        Jet with coefficients c_k = F^(k)(base)/k!, k = 0..K
    """
    if truncation < 1:
        raise PreconditionError(f"Jet truncation must be at least 1, got {truncation}")
    base = complex(base)
    with np.errstate(over='raise', invalid='raise'):
        try:
            series = _propagate(f, base, truncation + 1)
        except (FloatingPointError, OverflowError) as e:
            raise EvaluationError(f"Jet propagation overflowed: {e}", base) from e
    if not np.all(np.isfinite(series)):
        raise EvaluationError("Non-finite Taylor coefficient", base)
    return Jet(base=base, coefficients=tuple(complex(c) for c in series))
