"""Exact projective 2x2 matrices over the rationals.

Matrices are stored as primitive integer quadruples, so two matrices that
differ by a nonzero rational scalar share one representative.  For even
weight the slash action ignores scalars, which is what makes this quotient
usable for the group-ring computations in :mod:`heckeconv.ring`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Union

Rational = Union[int, Fraction]


class NonPositiveDeterminant(ValueError):
    pass


class UnsatisfiableConstraint(ValueError):
    pass


class NoRepresentative(ValueError):
    pass


class MatrixSyntaxError(ValueError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True, slots=True)
class ProjMat:
    """Canonical representative of a positive-determinant matrix class.

    Entries are coprime integers and the first nonzero entry of
    ``(a, b, c, d)`` is positive.  Build instances with :func:`canonicalize`
    (or :func:`mat`), never directly.
    """

    a: int
    b: int
    c: int
    d: int

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __mul__(self, other: "ProjMat") -> "ProjMat":
        if not isinstance(other, ProjMat):
            return NotImplemented
        return mul(self, other)

    def __pow__(self, n: int) -> "ProjMat":
        return power(self, n)

    def __invert__(self) -> "ProjMat":
        return inv(self)

    def is_identity(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d

    def __str__(self) -> str:
        return format_matrix(self)

    def __repr__(self) -> str:
        return f"ProjMat({self.a}, {self.b}, {self.c}, {self.d})"


def _from_ints(a: int, b: int, c: int, d: int) -> ProjMat:
    g = gcd(gcd(a, b), gcd(c, d))
    if g != 1:
        a, b, c, d = a // g, b // g, c // g, d // g
    first = a or b or c or d
    if first < 0:
        a, b, c, d = -a, -b, -c, -d
    return ProjMat(a, b, c, d)


def canonicalize(a: Rational, b: Rational, c: Rational, d: Rational) -> ProjMat:
    """Return the canonical class of ``[[a, b], [c, d]]``.

    >>> canonicalize(-15, 5, 25, -10)
    ProjMat(3, -1, -5, 2)
    """
    fa, fb, fc, fd = (Fraction(x) for x in (a, b, c, d))
    if fa * fd - fb * fc <= 0:
        raise NonPositiveDeterminant(f"det of [[{a},{b}],[{c},{d}]] is not positive")
    den = 1
    for x in (fa, fb, fc, fd):
        den = _lcm(den, x.denominator)
    return _from_ints(*(int(x * den) for x in (fa, fb, fc, fd)))


def mat(a: Rational, b: Rational, c: Rational, d: Rational) -> ProjMat:
    return canonicalize(a, b, c, d)


IDENTITY = ProjMat(1, 0, 0, 1)


def mul(x: ProjMat, y: ProjMat) -> ProjMat:
    return _from_ints(
        x.a * y.a + x.b * y.c,
        x.a * y.b + x.b * y.d,
        x.c * y.a + x.d * y.c,
        x.c * y.b + x.d * y.d,
    )


def inv(x: ProjMat) -> ProjMat:
    # adjugate; det > 0 so the class is preserved
    return _from_ints(x.d, -x.b, -x.c, x.a)


def power(x: ProjMat, n: int) -> ProjMat:
    if n < 0:
        x, n = inv(x), -n
    result = IDENTITY
    while n:
        if n & 1:
            result = mul(result, x)
        x = mul(x, x)
        n >>= 1
    return result


def product(mats: Iterable[ProjMat]) -> ProjMat:
    result = IDENTITY
    for m in mats:
        result = mul(result, m)
    return result


def det_class(x: ProjMat) -> Fraction:
    """Determinant of the canonical representative."""
    return Fraction(x.det)


# --- order classification -------------------------------------------------

FINITE_ORDERS = {0: 2, 1: 3, 2: 4, 3: 6}


@dataclass(frozen=True)
class OrderClass:
    kind: str  # Identity, EllipticFinite, EllipticInfinite, Parabolic, Hyperbolic
    discriminant: Fraction
    order: int | None = None

    def __str__(self) -> str:
        disc = f"tr^2/det = {self.discriminant}"
        if self.kind == "EllipticFinite":
            return f"elliptic, finite order {self.order}, {disc}"
        if self.kind == "EllipticInfinite":
            return f"elliptic, infinite order, {disc}"
        return f"{self.kind.lower()}, {disc}"


def classify_order(x: ProjMat) -> OrderClass:
    """Classify ``x`` by the scale-invariant quantity tr^2/det.

    A projective elliptic element has finite order exactly when its rotation
    angle is a rational multiple of pi with cos^2 in {0, 1/4, 1/2, 3/4}, which
    is tr^2/det in {0, 1, 2, 3}.
    """
    disc = Fraction(x.trace * x.trace, x.det)
    if x.is_identity():
        return OrderClass("Identity", disc, 1)
    if disc < 4:
        if disc.denominator == 1 and int(disc) in FINITE_ORDERS:
            return OrderClass("EllipticFinite", disc, FINITE_ORDERS[int(disc)])
        return OrderClass("EllipticInfinite", disc)
    if disc == 4:
        return OrderClass("Parabolic", disc)
    return OrderClass("Hyperbolic", disc)


def in_gamma0(x: ProjMat, N: int) -> bool:
    return x.det == 1 and x.c % N == 0


# --- named matrices ---------------------------------------------------------

def fricke(N: int) -> ProjMat:
    return canonicalize(0, -1, N, 0)


def translation(x: Rational) -> ProjMat:
    """beta(x) = [[1, x], [0, 1]]."""
    return canonicalize(1, x, 0, 1)


def diag(x: Rational, y: Rational = 1) -> ProjMat:
    return canonicalize(x, 0, 0, y)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _egcd(b, a % b)
    return (g, y, x - (a // b) * y)


def m_matrix(m: int, b: int, N: int) -> ProjMat:
    """[[m, b], [cN, d]] with md - bcN = 1 and 0 < 2|c| < |m|."""
    if m in (2, -2) and b == 1:
        base = m2_matrix(N)
        return base if m == 2 else product([inv(w_matrix(N)), base, inv(translation(1))])
    if gcd(m, b * N) != 1:
        raise UnsatisfiableConstraint(f"gcd({m}, {b}*{N}) != 1")
    # m d = 1 + b c N  =>  c = -(bN)^{-1} mod |m|
    _, u, _ = _egcd(b * N, m)
    c0 = (-u) % abs(m)
    found = [c for c in (c0, c0 - abs(m)) if 0 < 2 * abs(c) < abs(m)]
    if not found:
        raise NoRepresentative(f"no c with 0 < 2|c| < {abs(m)} for M_({m},{b}) at N={N}")
    c = found[0]
    d, r = divmod(1 + b * c * N, m)
    assert r == 0
    return canonicalize(m, b, c * N, d)


def m2_matrix(N: int) -> ProjMat:
    if N % 2 == 0:
        raise UnsatisfiableConstraint("M_2 requires odd N")
    return canonicalize(2, 1, N, (N + 1) // 2)


def w_matrix(N: int) -> ProjMat:
    return canonicalize(1, 0, N, 1)


def a_matrix(N: int) -> ProjMat:
    if N % 2:
        raise UnsatisfiableConstraint("A requires even N")
    return canonicalize(-2, 1, N, Fraction(-(N + 2), 2))


B_MATRIX = canonicalize(2, 1, 0, 2)
P_MATRIX = canonicalize(1, 1, 0, 1)


def named_matrix(name: str, N: int | None = None, m: int | None = None,
                 b: int = 1, x: Rational | None = None) -> ProjMat:
    if name == "P":
        return P_MATRIX
    if name == "B":
        return B_MATRIX
    if name == "beta":
        return translation(x)
    if N is None:
        raise UnsatisfiableConstraint(f"{name} needs a level")
    if name == "H":
        return fricke(N)
    if name == "W":
        return w_matrix(N)
    if name == "A":
        return a_matrix(N)
    if name == "M":
        if m is None:
            raise UnsatisfiableConstraint("M needs an index")
        return m_matrix(m, b, N)
    raise UnsatisfiableConstraint(f"unknown matrix name {name!r}")


# --- matrix literals and word expressions ----------------------------------

_NUM = r"-?\d+(?:/\d+)?"
_LITERAL_RE = re.compile(
    rf"^\[\s*({_NUM})\s*,\s*({_NUM})\s*;\s*({_NUM})\s*,\s*({_NUM})\s*\]$")


def parse_matrix(text: str) -> ProjMat:
    """Parse ``[a,b;c,d]`` with integer or ``p/q`` entries."""
    m = _LITERAL_RE.match(text.strip())
    if not m:
        raise MatrixSyntaxError(f"bad matrix literal {text!r}")
    return canonicalize(*(Fraction(g) for g in m.groups()))


def format_matrix(x: ProjMat) -> str:
    return f"[{x.a},{x.b};{x.c},{x.d}]"


_TOKEN_RE = re.compile(r"\s*(\[[^\]]*\]|M\(\s*-?\d+\s*(?:,\s*-?\d+\s*)?\)|beta\(\s*-?\d+(?:/\d+)?\s*\)"
                       r"|H\(\s*\d+\s*\)|W\(\s*\d+\s*\)|[PHWAB]|\^-?\d+|[()*])")


def _tokenize_expr(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise MatrixSyntaxError(f"cannot parse matrix expression at {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def eval_matrix_expr(expr: str, N: int) -> ProjMat:
    """Evaluate a word such as ``A^-1*W*A`` or ``H (W A)^2 H`` at level N.

    Atoms: ``P H W A B``, ``M(m)``, ``M(m,b)``, ``beta(x)``, ``H(n)``,
    ``W(n)`` and matrix literals.  Juxtaposition and ``*`` both multiply.
    """
    tokens = _tokenize_expr(expr)
    pos = 0

    def atom() -> ProjMat:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            val = word()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise MatrixSyntaxError("unbalanced parentheses")
            pos += 1
            return val
        if tok.startswith("["):
            return parse_matrix(tok)
        if tok.startswith("M("):
            args = [int(s) for s in tok[2:-1].split(",")]
            return m_matrix(args[0], args[1] if len(args) > 1 else 1, N)
        if tok.startswith("beta("):
            return translation(Fraction(tok[5:-1].strip()))
        if tok.startswith("H("):
            return fricke(int(tok[2:-1]))
        if tok.startswith("W("):
            return w_matrix(int(tok[2:-1]))
        if tok in "PHWAB":
            return named_matrix(tok, N)
        raise MatrixSyntaxError(f"unexpected token {tok!r}")

    def factor() -> ProjMat:
        nonlocal pos
        val = atom()
        while pos < len(tokens) and tokens[pos].startswith("^"):
            val = power(val, int(tokens[pos][1:]))
            pos += 1
        return val

    def word() -> ProjMat:
        nonlocal pos
        val = factor()
        while pos < len(tokens) and tokens[pos] != ")":
            if tokens[pos] == "*":
                pos += 1
            val = mul(val, factor())
        return val

    if not tokens:
        raise MatrixSyntaxError("empty expression")
    result = word()
    if pos != len(tokens):
        raise MatrixSyntaxError(f"trailing tokens in {expr!r}")
    return result
