#!/usr/bin/env python3
"""
Function Model Module
Parsed holomorphic right-hand side with cached evaluators
"""

from typing import Optional

import numpy as np

from .expression_ast import (
    Constant, ExprAst, Mul, Neg, compile_scalar, compile_vector, contains_division,
    derivative, to_source
)
from .expression_parser import parse
from .taylor_jet import DEFAULT_TRUNCATION, Jet, taylor_jet


class FunctionModel:
    """F(z) as an expression tree, evaluable at points, on arrays and as Taylor jets"""

    def __init__(self, ast: ExprAst, source: Optional[str] = None):
        """
        Initialize from an expression tree

        Args:
            ast: Parsed expression
            source: Original text (rendered from the tree if omitted)
        """
        self.ast = ast
        self.source = source if source is not None else to_source(ast)
        self._scalar = compile_scalar(ast)
        self._vector = compile_vector(ast)
        self._derivative: Optional['FunctionModel'] = None

    @classmethod
    def from_source(cls, source: str) -> 'FunctionModel':
        return cls(parse(source), source)

    def __call__(self, z: complex) -> complex:
        return self._scalar(z)

    def __repr__(self) -> str:
        return f"FunctionModel({self.source!r})"

    def evaluate_many(self, zs) -> np.ndarray:
        """F evaluated elementwise over a complex array"""
        return self._vector(zs)

    def jet(self, base: complex, truncation: int = DEFAULT_TRUNCATION) -> Jet:
        return taylor_jet(self.ast, base, truncation)

    @property
    def derivative(self) -> 'FunctionModel':
        """F' as its own model (built once)"""
        if self._derivative is None:
            self._derivative = FunctionModel(derivative(self.ast))
        return self._derivative

    @property
    def has_division(self) -> bool:
        return contains_division(self.ast)

    def negated(self) -> 'FunctionModel':
        """-F, the field of the time-reversed flow"""
        return FunctionModel(Neg(self.ast), f"-({self.source})")

    def scaled(self, factor: complex) -> 'FunctionModel':
        """factor * F"""
        return FunctionModel(Mul(Constant(factor), self.ast))
