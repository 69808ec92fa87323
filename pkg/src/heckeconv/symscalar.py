"""Commutative polynomial coefficients with the sign relation eps^2 = 1.

Symbols are ``eps`` (the Fricke sign) and eigenvalue placeholders
``alpha_<p>`` / ``alpha_<p>_<l>``.  Eigenvalue symbols are never given
numeric values here.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

SIGN = "eps"

Monomial = tuple  # sorted tuple of (name, exponent)


class UnknownSymbol(KeyError):
    pass


class SymbolTable:
    """Declared symbol names; ``eps`` is the only involutive symbol."""

    _PATTERN = re.compile(r"^(eps|alpha_\d+(?:_\d+)?)$")

    def __init__(self, names: Iterable[str] = ()):
        self.names: set[str] = {SIGN}
        for n in names:
            self.declare(n)

    def declare(self, name: str) -> str:
        if not self._PATTERN.match(name):
            raise UnknownSymbol(name)
        self.names.add(name)
        return name

    def check(self, name: str) -> None:
        if name not in self.names and not self._PATTERN.match(name):
            raise UnknownSymbol(name)

    def is_sign(self, name: str) -> bool:
        return name == SIGN


DEFAULT_TABLE = SymbolTable()


def _mono_mul(x: Monomial, y: Monomial) -> Monomial:
    if not x:
        return y
    if not y:
        return x
    powers = dict(x)
    for name, e in y:
        powers[name] = powers.get(name, 0) + e
    if SIGN in powers:
        powers[SIGN] %= 2
    return tuple(sorted((n, e) for n, e in powers.items() if e))


class SymScalar:
    """Immutable polynomial; ``terms`` maps monomials to nonzero rationals."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        clean = {}
        if terms:
            for mono, coef in terms.items():
                if coef:
                    clean[mono] = Fraction(coef)
        self.terms: dict[Monomial, Fraction] = clean
        self._hash = None

    @classmethod
    def const(cls, value: Union[int, Fraction]) -> "SymScalar":
        return cls({(): Fraction(value)}) if value else ZERO

    @classmethod
    def symbol(cls, name: str, table: SymbolTable = DEFAULT_TABLE) -> "SymScalar":
        table.check(name)
        return cls({((name, 1),): Fraction(1)})

    # arithmetic
    def __add__(self, other):
        other = as_scalar(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for mono, coef in other.terms.items():
            out[mono] = out.get(mono, 0) + coef
        return SymScalar(out)

    __radd__ = __add__

    def __neg__(self):
        return SymScalar({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = as_scalar(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __mul__(self, other):
        other = as_scalar(other)
        if other is None:
            return NotImplemented
        if not self.terms or not other.terms:
            return ZERO
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return SymScalar(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = ONE
        for _ in range(n):
            result = result * self
        return result

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or set(self.terms) == {()}

    def constant(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def symbols(self) -> set[str]:
        return {name for mono in self.terms for name, _ in mono}

    def __eq__(self, other):
        other = as_scalar(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"SymScalar({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


def as_scalar(x) -> SymScalar | None:
    if isinstance(x, SymScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return SymScalar.const(x)
    return None


ZERO = SymScalar()
ONE = SymScalar({(): Fraction(1)})
EPS = SymScalar({((SIGN, 1),): Fraction(1)})


def alpha(p: int, lam: int | None = None) -> SymScalar:
    name = f"alpha_{p}" if lam is None else f"alpha_{p}_{lam}"
    return SymScalar.symbol(name)


def scal_add(x: SymScalar, y: SymScalar) -> SymScalar:
    return x + y


def scal_mul(x: SymScalar, y: SymScalar) -> SymScalar:
    return x * y


def scal_neg(x: SymScalar) -> SymScalar:
    return -x


def scal_is_zero(x: SymScalar) -> bool:
    return x.is_zero()


def _format_mono(mono: Monomial) -> str:
    return "*".join(n if e == 1 else f"{n}^{e}" for n, e in mono)


def _mono_key(mono: Monomial):
    return (sum(e for _, e in mono), mono)


def format_scalar(x: SymScalar) -> str:
    if not x.terms:
        return "0"
    parts = []
    for mono in sorted(x.terms, key=_mono_key):
        coef = x.terms[mono]
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = _format_mono(mono)
        else:
            body = f"{mag}*{_format_mono(mono)}"
        parts.append((sign, body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out
