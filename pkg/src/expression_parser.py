#!/usr/bin/env python3
"""
Expression Parser Module
Recursive-descent parser for the right-hand side grammar

    expr    := term { ("+"|"-") term } ;
    term    := factor { ("*"|"/") factor } ;
    factor  := "-" factor | power ;
    power   := atom [ "^" integer ] ;
    atom    := number [ "i" ] | "i" | "z" | "(" expr ")" | ident "(" expr ")" ;
    ident   := "exp" | "sin" | "cos" ;
    number  := digits [ "." digits ] ;
"""

import re
from dataclasses import dataclass
from typing import List

from .errors import ExpressionSyntaxError
from .expression_ast import (
    Add, Constant, Cos, Div, Exp, ExprAst, IntPow, Mul, Neg, Sin, Sub, Variable
)

TOKEN_PATTERN = re.compile(r'\s*(?:(?P<number>\d+(?:\.\d+)?)|(?P<word>[A-Za-z_]+)|(?P<op>[-+*/^()]))')

FUNCTIONS = {'exp': Exp, 'sin': Sin, 'cos': Cos}
WORDS = {'i', 'z', *FUNCTIONS}

ATOM_START = ('number', 'i', 'z', '(', 'exp', 'sin', 'cos')
FACTOR_START = ATOM_START + ('-',)


@dataclass(frozen=True)
class Token:
    kind: str    # 'number', 'word', 'op' or 'end'
    text: str
    offset: int  # byte offset into the UTF-8 source


def tokenize(source: str) -> List[Token]:
    """
    Split source text into tokens

    Args:
        source: Expression text

    Returns:
        Token list terminated by an 'end' token
    """
    tokens = []
    position = 0
    byte_offset = lambda index: len(source[:index].encode('utf-8'))

    while True:
        while position < len(source) and source[position].isspace():
            position += 1
        if position >= len(source):
            tokens.append(Token('end', '', byte_offset(position)))
            return tokens

        match = TOKEN_PATTERN.match(source, position)
        if not match or match.end() == position:
            raise ExpressionSyntaxError(
                f"Unexpected character {source[position]!r}", byte_offset(position), FACTOR_START
            )
        kind = match.lastgroup
        start = match.start(kind)
        text = match.group(kind)
        if kind == 'word' and text not in WORDS:
            raise ExpressionSyntaxError(f"Unknown identifier {text!r}", byte_offset(start), sorted(WORDS))
        tokens.append(Token(kind, text, byte_offset(start)))
        position = match.end()


class ExpressionParser:
    """Parse expression text into an ExprAst"""

    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def _is(self, text: str) -> bool:
        return self.current.kind in ('op', 'word') and self.current.text == text

    def _fail(self, message: str, expected) -> None:
        found = self.current.text or 'end of input'
        raise ExpressionSyntaxError(f"{message}, found {found!r}", self.current.offset, expected)

    def parse(self) -> ExprAst:
        tree = self._expr()
        if self.current.kind != 'end':
            self._fail("Unexpected token", ('+', '-', '*', '/', '^', 'end of input'))
        return tree

    def _expr(self) -> ExprAst:
        tree = self._term()
        while self._is('+') or self._is('-'):
            op = self._advance().text
            right = self._term()
            tree = Add(tree, right) if op == '+' else Sub(tree, right)
        return tree

    def _term(self) -> ExprAst:
        tree = self._factor()
        while self._is('*') or self._is('/'):
            op = self._advance().text
            right = self._factor()
            tree = Mul(tree, right) if op == '*' else Div(tree, right)
        return tree

    def _factor(self) -> ExprAst:
        if self._is('-'):
            self._advance()
            return Neg(self._factor())
        return self._power()

    def _power(self) -> ExprAst:
        base = self._atom()
        if not self._is('^'):
            return base
        self._advance()
        token = self.current
        if token.kind != 'number' or '.' in token.text:
            self._fail("Exponent must be a non-negative integer", ('integer',))
        self._advance()
        return IntPow(base, int(token.text))

    def _atom(self) -> ExprAst:
        token = self.current
        if token.kind == 'number':
            self._advance()
            value = float(token.text)
            if self._is('i'):
                self._advance()
                return Constant(complex(0.0, value))
            return Constant(value)
        if self._is('i'):
            self._advance()
            return Constant(1j)
        if self._is('z'):
            self._advance()
            return Variable()
        if self._is('('):
            self._advance()
            tree = self._expr()
            if not self._is(')'):
                self._fail("Missing closing parenthesis", (')',))
            self._advance()
            return tree
        if token.kind == 'word' and token.text in FUNCTIONS:
            self._advance()
            if not self._is('('):
                self._fail(f"Function {token.text} needs an argument", ('(',))
            self._advance()
            argument = self._expr()
            if not self._is(')'):
                self._fail("Missing closing parenthesis", (')',))
            self._advance()
            return FUNCTIONS[token.text](argument)
        self._fail("Expected an operand", FACTOR_START)


def parse(source: str) -> ExprAst:
    """
    Parse expression text

    Args:
        source: Text following the grammar in this module's docstring

    Returns:
        Expression tree

    Raises:
        ExpressionSyntaxError: with byte offset and expected-token set
    """
    return ExpressionParser(source).parse()
