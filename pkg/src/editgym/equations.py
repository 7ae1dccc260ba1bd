"""Exact arithmetic over token sequences.

Grammar (whitespace-split tokens, one token per list element):

    equation := expr "=" expr
    expr     := ["-"] term (("+" | "-") term)*
    term     := factor (("*" | "/") factor)*
    factor   := INT | "(" expr ")"

Both sides evaluate in rational arithmetic, so "6 / 2" is exactly 3 and
non-integer intermediates are well defined. Parsing and evaluation are
separate passes: a structurally broken sequence is malformed even if the
broken part sits after a division by zero.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .types import State

VALID = "valid"
INVALID = "invalid"
MALFORMED = "malformed"

_INT_RE = re.compile(r"^[0-9]+$")


class _ParseError(Exception):
    pass


class _Parser:
    def __init__(self, tokens: State):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def equation(self):
        lhs = self.expr()
        if self.take() != "=":
            raise _ParseError("expected '='")
        rhs = self.expr()
        if self.i != len(self.tokens):
            raise _ParseError("trailing tokens")
        return lhs, rhs

    def expr(self):
        # the optional leading "-" negates the first term only
        negate = False
        if self.peek() == "-":
            self.take()
            negate = True
        node = self.term()
        if negate:
            node = ("neg", node)
        while self.peek() in ("+", "-"):
            op = self.take()
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            node = ("bin", op, node, self.factor())
        return node

    def factor(self):
        tok = self.take()
        if tok == "(":
            node = self.expr()
            if self.take() != ")":
                raise _ParseError("expected ')'")
            return node
        if tok is not None and _INT_RE.match(tok):
            return ("int", int(tok))
        raise _ParseError(f"unexpected token {tok!r}")


def _evaluate(node) -> Fraction:
    kind = node[0]
    if kind == "int":
        return Fraction(node[1])
    if kind == "neg":
        return -_evaluate(node[1])
    _, op, left, right = node
    a, b = _evaluate(left), _evaluate(right)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    return a / b  # may raise ZeroDivisionError


def check_equation(state: State) -> str:
    """VALID iff the state parses as an equation whose sides are equal."""
    try:
        lhs, rhs = _Parser(state).equation()
    except _ParseError:
        return MALFORMED
    try:
        return VALID if _evaluate(lhs) == _evaluate(rhs) else INVALID
    except ZeroDivisionError:
        return INVALID
