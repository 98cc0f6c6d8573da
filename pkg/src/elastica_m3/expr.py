"""Arithmetic expression DSL for surface patches, curves and bump functions.

Recursive-descent parser over the grammar (see README for the EBNF):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' exponent)*          # exponent is a signed integer
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Functions: sin cos sinh cosh tanh exp log sqrt.  Constants pi and e are
folded into numeric literals at parse time.  Every identifier must come from
the declared variable set; division, log and sqrt domains are checked at
evaluation time, not at parse time.

Evaluation is payload-generic: variables may be bound to floats, numpy
arrays or jets, and the tree is folded with ordinary arithmetic operators.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprSyntaxError, UnknownVariableError
from .jets import Jet2

__all__ = ["Expr", "parse", "evaluate", "to_source", "FUNCTIONS"]

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "tanh", "exp", "log", "sqrt")
_CONSTANTS = {"pi": math.pi, "e": math.e}


class Expr:
    """Base class for parse-tree nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Sub(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Mul(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Div(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN.match(source, pos)
        if match is None:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", pos)
        if match.lastgroup == "num":
            tokens.append(("num", match.group("num"), match.start("num")))
        elif match.lastgroup == "ident":
            tokens.append(("ident", match.group("ident"), match.start("ident")))
        else:
            tokens.append(("op", match.group("op"), match.start("op")))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, source, variables):
        self.source = source
        self.tokens = _tokenize(source)
        self.variables = frozenset(variables)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.source))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", pos)

    def parse(self):
        if not self.tokens:
            raise ExprSyntaxError("empty expression", 0)
        node = self.expr()
        kind, val, pos = self.peek()
        if kind is not None:
            raise ExprSyntaxError(f"trailing input {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                node = Add(node, rhs) if val == "+" else Sub(node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.unary()
                node = Mul(node, rhs) if val == "*" else Div(node, rhs)
            else:
                return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "^":
                self.next()
                node = Pow(node, self.exponent())
            else:
                return node

    def exponent(self):
        sign = 1
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.next()
            sign = -1
        kind, val, pos = self.next()
        if kind != "num":
            raise ExprSyntaxError("exponent must be an integer literal", pos)
        number = float(val)
        if number != int(number):
            raise ExprSyntaxError("exponent must be an integer literal", pos)
        return sign * int(number)

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            if val in _CONSTANTS:
                return Num(_CONSTANTS[val])
            if val not in self.variables:
                raise UnknownVariableError(val, pos)
            return Var(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {val!r}", pos)


def parse(source: str, variables) -> Expr:
    """Parse `source` over the declared variable names."""
    return _Parser(source, variables).parse()


def evaluate(expr: Expr, env: dict):
    """Fold the tree with the payloads bound in `env` (floats, arrays, jets)."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, Neg):
        return -evaluate(expr.arg, env)
    if isinstance(expr, Add):
        return evaluate(expr.a, env) + evaluate(expr.b, env)
    if isinstance(expr, Sub):
        return evaluate(expr.a, env) - evaluate(expr.b, env)
    if isinstance(expr, Mul):
        return evaluate(expr.a, env) * evaluate(expr.b, env)
    if isinstance(expr, Div):
        return evaluate(expr.a, env) / evaluate(expr.b, env)
    if isinstance(expr, Pow):
        base = evaluate(expr.base, env)
        if isinstance(base, Jet2):
            return base**expr.exponent
        return np.power(base, float(expr.exponent))
    if isinstance(expr, Call):
        arg = evaluate(expr.arg, env)
        if isinstance(arg, Jet2):
            return getattr(arg, expr.fn)()
        return getattr(np, expr.fn)(arg)
    raise TypeError(f"not an Expr node: {expr!r}")


_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4, Num: 5, Var: 5, Call: 5}


def to_source(expr: Expr) -> str:
    """Canonical printer; `parse(to_source(e), vars)` reproduces the tree."""

    def wrap(child, level, strict=False):
        text = to_source(child)
        prec = _PREC[type(child)]
        if prec < level or (strict and prec == level):
            return f"({text})"
        return text

    if isinstance(expr, Num):
        if expr.value < 0:
            return f"({expr.value!r})"
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return "-" + wrap(expr.arg, 3)
    if isinstance(expr, Add):
        return f"{wrap(expr.a, 1)} + {wrap(expr.b, 1, strict=True)}"
    if isinstance(expr, Sub):
        return f"{wrap(expr.a, 1)} - {wrap(expr.b, 1, strict=True)}"
    if isinstance(expr, Mul):
        return f"{wrap(expr.a, 2)}*{wrap(expr.b, 2, strict=True)}"
    if isinstance(expr, Div):
        return f"{wrap(expr.a, 2)}/{wrap(expr.b, 2, strict=True)}"
    if isinstance(expr, Pow):
        return f"{wrap(expr.base, 4, strict=True)}^{expr.exponent}"
    if isinstance(expr, Call):
        return f"{expr.fn}({to_source(expr.arg)})"
    raise TypeError(f"not an Expr node: {expr!r}")
