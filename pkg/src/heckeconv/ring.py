"""Group ring over projective matrices with symbolic coefficients."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping

from .linalg import IDENTITY, ProjMat, canonicalize, format_matrix, inv, mul, power
from .symscalar import ONE, SymScalar, as_scalar, format_scalar


class NotPrime(ValueError):
    pass


class RingElem:
    """Finite formal sum of :class:`ProjMat` with :class:`SymScalar` weights.

    Scalar matrix classes collapse onto the identity, so multiplicities of
    scalar terms are kept as integer coefficients.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[ProjMat, SymScalar] | None = None):
        self.terms: dict[ProjMat, SymScalar] = {}
        if terms:
            for m, c in terms.items():
                c = as_scalar(c)
                if c:
                    self.terms[m] = c

    @classmethod
    def of(cls, m: ProjMat, coef=ONE) -> "RingElem":
        return cls({m: as_scalar(coef)})

    @classmethod
    def scalar(cls, coef) -> "RingElem":
        return cls({IDENTITY: as_scalar(coef)})

    @classmethod
    def sum(cls, mats: Iterable[ProjMat]) -> "RingElem":
        out: dict[ProjMat, SymScalar] = {}
        for m in mats:
            out[m] = out.get(m, SymScalar()) + 1
        return cls(out)

    def _coerce(self, other) -> "RingElem | None":
        if isinstance(other, RingElem):
            return other
        if isinstance(other, ProjMat):
            return RingElem.of(other)
        s = as_scalar(other)
        if s is not None:
            return RingElem.scalar(s)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return RingElem(out)

    __radd__ = __add__

    def __neg__(self):
        return RingElem({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out: dict[ProjMat, SymScalar] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mul(m1, m2)
                c = c1 * c2
                out[m] = out[m] + c if m in out else c
        return RingElem(out)

    def __rmul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("only single-term elements can be inverted")
            (m, c), = self.terms.items()
            if not c.is_constant():
                raise ValueError("coefficient is not invertible")
            return RingElem.of(power(inv(m), -n), SymScalar.const(1 / c.constant() ** -n))
        result = RingElem.scalar(1)
        for _ in range(n):
            result = result * self
        return result

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def coefficient(self, m: ProjMat) -> SymScalar:
        return self.terms.get(m, SymScalar())

    def matrices(self) -> list[ProjMat]:
        return sorted(self.terms, key=_mat_key)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"RingElem({format_elem(self)!r})"

    def __str__(self):
        return format_elem(self)


def _mat_key(m: ProjMat):
    return (not m.is_identity(), abs(m.det), m.entries())


def format_elem(x: RingElem) -> str:
    if not x.terms:
        return "0"
    parts = []
    for m in x.matrices():
        c = x.terms[m]
        if c.is_constant():
            v = c.constant()
            sign = "-" if v < 0 else "+"
            body = f"{abs(v)}*{format_matrix(m)}"
        else:
            sign, body = "+", f"({format_scalar(c)})*{format_matrix(m)}"
        parts.append((sign, body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def ring_add(x: RingElem, y: RingElem) -> RingElem:
    return x + y


def ring_neg(x: RingElem) -> RingElem:
    return -x


def ring_mul(x: RingElem, y: RingElem) -> RingElem:
    return x * y


def elem(m: ProjMat, coef=ONE) -> RingElem:
    return RingElem.of(m, coef)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise NotPrime(p)


def hecke_T(p: int) -> RingElem:
    """[[p,0],[0,1]] + sum_a [[1,a],[0,p]]."""
    _require_prime(p)
    mats = [canonicalize(p, 0, 0, 1)] + [canonicalize(1, a, 0, p) for a in range(p)]
    return RingElem.sum(mats)


def hecke_T_power(p: int, lam: int) -> RingElem:
    """Double-sum form sum_j sum_{b < p^j} [[p^(lam-j), b], [0, p^j]]."""
    _require_prime(p)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    mats = [canonicalize(p ** (lam - j), b, 0, p ** j)
            for j in range(lam + 1) for b in range(p ** j)]
    return RingElem.sum(mats)


def atkin_U(q: int) -> RingElem:
    _require_prime(q)
    return RingElem.sum(canonicalize(q, a, 0, q) for a in range(q))


def R_sum(n: int, reps: Iterable[int] | None = None) -> RingElem:
    """sum over a coprime to n of [[n,a],[0,n]] (a in 1..n unless reps given)."""
    if n < 1:
        raise ValueError("n must be positive")
    if reps is None:
        reps = [a for a in range(1, n + 1) if gcd(a, n) == 1]
    return RingElem.sum(canonicalize(n, a, 0, n) for a in reps)


def translation_sum(n: int, reps: Iterable[int]) -> RingElem:
    """sum over reps of beta(a/n)."""
    return RingElem.sum(canonicalize(1, Fraction(a, n), 0, 1) for a in reps)
