"""Tiny expression language for forcing terms, right-hand sides and brackets.

Accepted forms::

    const:<v>            constant
    poly:<c0,c1,...>     c0 + c1 t + c2 t**2 + ...
    sin | cos | exp      the named function of t
    <expression>         literals, t, x, pi, + - * / ^, parentheses, sin(), cos(), exp()

Every parsed function takes ``(t, x)`` arrays and returns an array of the
broadcast shape; ``x`` is ignored by expressions that do not mention it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
CONSTANTS = {"pi": np.pi}
_BINARY = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide}

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)"
                    r"|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))")


class ExpressionError(ValueError):
    def __init__(self, message: str, spec: str, column: int):
        self.spec = spec
        self.column = column
        super().__init__(f"{message} at column {column} in {spec!r}")


@dataclass(frozen=True)
class Expression:
    """A parsed function of (t, x), callable on numpy arrays."""

    spec: str
    fn: Callable
    uses_x: bool

    def __call__(self, t, x=0.0):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        return np.broadcast_to(np.asarray(self.fn(t, x), dtype=float), t.shape).copy()

    def of_t(self) -> Callable:
        """View as a function of t alone (requires ``x`` to be unused)."""
        if self.uses_x:
            raise ExpressionError("expression depends on x where only t is allowed", self.spec, 1)
        return lambda t: self(t)


def _tokenize(spec: str):
    pos = 0
    tokens = []
    while pos < len(spec):
        if spec[pos:].strip() == "":
            break
        m = _TOKEN.match(spec, pos)
        if m is None or m.end() == pos:
            col = pos + len(spec[pos:]) - len(spec[pos:].lstrip()) + 1
            raise ExpressionError(f"unexpected character {spec[col - 1]!r}", spec, col)
        kind = m.lastgroup
        col = m.start(kind) + 1
        tokens.append((kind, m.group(kind), col))
        pos = m.end()
    tokens.append(("end", "", len(spec) + 1))
    return tokens


def _binary(op, lhs, rhs):
    return lambda t, x: op(lhs(t, x), rhs(t, x))


class _Parser:
    """Recursive descent: expr := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*,
    unary := '-' unary | power, power := atom ('^' unary)?"""

    def __init__(self, spec: str, variables: tuple[str, ...]):
        self.spec = spec
        self.tokens = _tokenize(spec)
        self.i = 0
        self.variables = variables
        self.uses_x = False

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, col = self.take()
        if text != value:
            shown = repr(text) if text else "end of input"
            raise ExpressionError(f"expected {value!r} but found {shown}", self.spec, col)

    def parse(self):
        node = self.expr()
        kind, text, col = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected token {text!r}", self.spec, col)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = _binary(_BINARY[op], node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = _binary(_BINARY[op], node, rhs)
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            inner = self.unary()
            return lambda t, x: -inner(t, x)
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            exponent = self.unary()
            return lambda t, x: np.power(base(t, x), exponent(t, x))
        return base

    def atom(self):
        kind, text, col = self.take()
        if kind == "num":
            value = float(text)
            return lambda t, x: value
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if text in FUNCTIONS:
                fn = FUNCTIONS[text]
                if self.peek()[1] != "(":
                    raise ExpressionError(f"function {text!r} takes exactly one argument in parentheses",
                                          self.spec, col)
                self.take()
                arg = self.expr()
                if self.peek()[1] != ")":
                    raise ExpressionError(f"function {text!r} takes exactly one argument",
                                          self.spec, self.peek()[2])
                self.take()
                return lambda t, x: fn(arg(t, x))
            if text in CONSTANTS:
                value = CONSTANTS[text]
                return lambda t, x: value
            if text in self.variables:
                if text == "x":
                    self.uses_x = True
                    return lambda t, x: x
                return lambda t, x: t
            raise ExpressionError(f"unknown identifier {text!r}", self.spec, col)
        shown = repr(text) if text else "end of input"
        raise ExpressionError(f"unexpected {shown}", self.spec, col)


def parse_expression(spec: str, variables: tuple[str, ...] = ("t", "x")) -> Expression:
    """Parse a function spec into a callable of (t, x); errors name the token and column."""
    if not isinstance(spec, str) or not spec.strip():
        raise ExpressionError("empty expression", str(spec), 1)
    text = spec.strip()
    head, sep, tail = text.partition(":")
    if sep and head in ("const", "poly"):
        # 1-based column of the first character after the colon, measured in the original spec
        offset = spec.index(":") + 2
        coeffs = []
        for piece in tail.split(","):
            if not _is_float(piece):
                raise ExpressionError(f"bad number {piece.strip()!r}", spec, offset)
            coeffs.append(float(piece))
            offset += len(piece) + 1
        if head == "const":
            if len(coeffs) != 1:
                raise ExpressionError("const takes exactly one value", spec, offset)
            value = coeffs[0]
            return Expression(spec, lambda t, x: np.full(np.shape(t), value), False)
        poly = np.polynomial.Polynomial(coeffs)
        return Expression(spec, lambda t, x: poly(t), False)
    if text in FUNCTIONS:
        fn = FUNCTIONS[text]
        return Expression(spec, lambda t, x: fn(t), False)
    parser = _Parser(spec, variables)
    node = parser.parse()
    return Expression(spec, node, parser.uses_x)


def _is_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True
