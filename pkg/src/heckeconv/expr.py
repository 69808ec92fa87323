"""Parser for group-ring element expressions.

Grammar (whitespace insensitive)::

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := "-" unary | power
    power  := atom ("^" ["-"] INT)?
    atom   := INT ["/" INT] | SYMBOL | "[a,b;c,d]" | "(" expr ")"

Scalars and symbols denote multiples of the identity class.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .linalg import parse_matrix
from .ring import RingElem
from .symscalar import SymScalar


class ExprSyntaxError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(\[[^\]]*\]|\d+|[A-Za-z_][A-Za-z_0-9]*|[-+*/^()])")


def tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character at {text[pos:pos + 20]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ExprSyntaxError(f"expected {expected or 'token'}, got {tok!r}")
        self.pos += 1
        return tok

    def expr(self) -> RingElem:
        val = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self) -> RingElem:
        val = self.unary()
        while self.peek() == "*":
            self.take()
            val = val * self.unary()
        return val

    def unary(self) -> RingElem:
        if self.peek() == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self) -> RingElem:
        val = self.atom()
        if self.peek() == "^":
            self.take()
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            tok = self.take()
            if not tok.isdigit():
                raise ExprSyntaxError(f"bad exponent {tok!r}")
            val = val ** (sign * int(tok))
        return val

    def atom(self) -> RingElem:
        tok = self.take()
        if tok == "(":
            val = self.expr()
            self.take(")")
            return val
        if tok.startswith("["):
            return RingElem.of(parse_matrix(tok))
        if tok.isdigit():
            value = Fraction(int(tok))
            if self.peek() == "/":
                self.take()
                den = self.take()
                if not den.isdigit():
                    raise ExprSyntaxError(f"bad denominator {den!r}")
                value /= int(den)
            return RingElem.scalar(value)
        if re.match(r"[A-Za-z_]", tok):
            return RingElem.scalar(SymScalar.symbol(tok))
        raise ExprSyntaxError(f"unexpected token {tok!r}")


def parse_elem(text: str) -> RingElem:
    p = _Parser(tokenize(text))
    val = p.expr()
    if p.peek() is not None:
        raise ExprSyntaxError(f"trailing input at {p.peek()!r}")
    return val


def parse_scalar(text: str) -> SymScalar:
    val = parse_elem(text)
    if not val.terms:
        return SymScalar()
    if len(val.terms) != 1 or not next(iter(val.terms)).is_identity():
        raise ExprSyntaxError(f"{text!r} is not a scalar")
    return next(iter(val.terms.values()))


def parse_cert(text: str) -> list[tuple[str, RingElem]]:
    """Parse ``id*(expr) + id*(expr) - ...`` into (id, multiplier) pairs."""
    p = _Parser(tokenize(text))
    out = []
    first = True
    while p.peek() is not None:
        sign = 1
        if p.peek() in ("+", "-"):
            sign = -1 if p.take() == "-" else 1
        elif not first:
            raise ExprSyntaxError(f"expected + or - before {p.peek()!r}")
        rid = p.take()
        if not re.match(r"[A-Za-z_][A-Za-z_0-9]*$", rid):
            raise ExprSyntaxError(f"bad relation id {rid!r}")
        p.take("*")
        p.take("(")
        mult = p.expr()
        p.take(")")
        out.append((rid, mult if sign > 0 else -mult))
        first = False
    if not out:
        raise ExprSyntaxError("empty certificate")
    return out
