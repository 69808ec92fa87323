"""Cusps 1/r of Gamma0(N) and the conjugating matrices used at them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .linalg import IDENTITY, ProjMat, canonicalize, in_gamma0, mul


class InvalidCuspData(ValueError):
    pass


def lemma6_gamma(N: int, r: int, a: int) -> tuple[ProjMat, int, int]:
    """gamma in Gamma0(N) with gamma [[1,0],[ar,1]] = [[1,b],[-r,d]].

    d is the unreduced CRT combination of d = 1 (mod r) and
    d = -a^-1 (mod N/r); b = (1 - d)/r.
    """
    if r < 1 or N % r:
        raise InvalidCuspData(f"{r} does not divide {N}")
    Q = N // r
    if gcd(a * r, Q) != 1 or gcd(r, Q) != 1:
        raise InvalidCuspData(f"need gcd(ar, N/r) = gcd(r, N/r) = 1 (N={N}, r={r}, a={a})")
    if Q == 1:
        d = 1
    else:
        target = (-pow(a, -1, Q)) % Q
        d = Q * pow(Q, -1, r) + target * r * pow(r, -1, Q) if r > 1 else target
    b = (1 - d) // r
    gamma = mul(canonicalize(1, b, -r, d), canonicalize(1, 0, -a * r, 1))
    if not in_gamma0(gamma, N):
        raise InvalidCuspData(f"constructed {gamma} not in Gamma0({N})")
    return gamma, b, d


def lemma6_any(N: int, r: int, a: int) -> tuple[ProjMat, int, int]:
    """As lemma6_gamma, also when gcd(r, N/r) > 1.

    Then d = 1 (mod r) and d = -a^-1 (mod N/r) are compatible iff
    a = -1 modulo gcd(r, N/r); we take the least positive such d.
    """
    Q = N // r
    if N % r == 0 and gcd(r, Q) == 1:
        return lemma6_gamma(N, r, a)
    if N % r or gcd(a, Q) != 1:
        raise InvalidCuspData(f"bad cusp data N={N}, r={r}, a={a}")
    target = (-pow(a, -1, Q)) % Q
    lcm = r * Q // gcd(r, Q)
    d = next((x for x in range(1, lcm + 1) if x % r == 1 % r and x % Q == target), None)
    if d is None:
        raise InvalidCuspData(f"no d for N={N}, r={r}, a={a}")
    b = (1 - d) // r
    gamma = mul(canonicalize(1, b, -r, d), canonicalize(1, 0, -a * r, 1))
    if not in_gamma0(gamma, N):
        raise InvalidCuspData(f"constructed {gamma} not in Gamma0({N})")
    return gamma, b, d


@dataclass(frozen=True)
class CuspSpec:
    """Cusp with scaling matrix ``sigma`` (sigma(oo) = cusp) and width."""

    label: str
    level: int
    sigma: ProjMat
    width: int

    @classmethod
    def infinity(cls, N: int) -> "CuspSpec":
        return cls("oo", N, IDENTITY, 1)

    @classmethod
    def zero(cls, N: int) -> "CuspSpec":
        return cls("0", N, canonicalize(0, -1, 1, 0), N)

    @classmethod
    def one_over(cls, N: int, r: int) -> "CuspSpec":
        """Cusp 1/r, r | N.  Width N / gcd(r^2, N), which is N/r when gcd(r, N/r) = 1."""
        if r < 1 or N % r:
            raise InvalidCuspData(f"{r} does not divide {N}")
        if r == N:
            return cls.infinity(N)
        return cls(f"1/{r}", N, canonicalize(1, 0, r, 1), N // gcd(r * r, N))

    @classmethod
    def parse(cls, text: str, N: int) -> "CuspSpec":
        t = text.strip().lower()
        if t in ("oo", "inf", "infinity", "i"):
            return cls.infinity(N)
        if t == "0":
            return cls.zero(N)
        x = Fraction(t)
        if x.numerator != 1:
            raise InvalidCuspData(f"cusp must be oo, 0 or 1/r, got {text!r}")
        return cls.one_over(N, x.denominator)

    @property
    def center(self) -> float:
        """Real part where sigma z has the largest imaginary part."""
        c, d = self.sigma.c, self.sigma.d
        return -d / c if c else 0.0
