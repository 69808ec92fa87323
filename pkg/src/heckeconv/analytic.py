"""Concrete q-expansions and numeric slash-action checks.

Coefficients are exact (ints or Fractions).  Only point evaluation is done
in double precision, and every evaluation carries a bound for the part of
the series beyond the truncation K.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

from .cusps import CuspSpec, InvalidCuspData, lemma6_gamma  # noqa: F401  (re-exported)
from .linalg import IDENTITY, ProjMat, canonicalize, fricke, translation

TWO_PI_I = 2j * np.pi
DEFAULT_K = 1000
DEFAULT_TOL = 1e-8
MIN_IMAG = 0.08


class NonIntegralLeadingPower(ValueError):
    pass


class MissingPrime(KeyError):
    pass


class PrecisionUnreachable(ArithmeticError):
    pass


@dataclass
class FourierSeries:
    """f(z) = sum_{n=0}^{K} a_n e(nz); ``coeffs[n]`` is a_n."""

    weight: int
    level: int
    coeffs: list
    name: str = ""
    _float: np.ndarray | None = field(default=None, repr=False, compare=False)
    _bound: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int):
        return self.coeffs[n]

    def truncate(self, K: int) -> "FourierSeries":
        if K > self.K:
            raise ValueError(f"series only known to {self.K} terms")
        return FourierSeries(self.weight, self.level, self.coeffs[:K + 1], self.name)

    def floats(self) -> np.ndarray:
        if self._float is None:
            self._float = np.array([float(c) for c in self.coeffs])
        return self._float

    def growth(self) -> tuple[float, float]:
        """(C, e) with |a_n| <= C n^e for 1 <= n <= K, e = k/2 + 1."""
        if self._bound is None:
            e = self.weight / 2 + 1
            a = np.abs(self.floats()[1:])
            n = np.arange(1, self.K + 1, dtype=float)
            self._bound = (float(np.max(a / n ** e)) if len(a) else 0.0, e)
        return self._bound

    def tail_bound(self, y: float) -> float:
        """Bound on |sum_{n>K} a_n e(nz)| at Im z = y, extrapolating the growth fit."""
        C, e = self.growth()
        if C == 0:
            return 0.0
        K = self.K
        r = np.exp(-2 * np.pi * y)
        rho = (1 + 1 / (K + 1)) ** e * r
        if rho >= 1:
            return float("inf")
        return float(C * (K + 1) ** e * r ** (K + 1) / (1 - rho))

    def __call__(self, z):
        """Truncated sum at z (scalar or array); no tail accounting."""
        z = np.asarray(z, dtype=complex)
        n = np.arange(self.K + 1)
        terms = np.exp(TWO_PI_I * np.multiply.outer(z, n))
        return terms @ self.floats()

    # --- exchange format --------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({"level": self.level, "weight": self.weight, "K": self.K,
                           "name": self.name,
                           "coefficients": [str(Fraction(c)) for c in self.coeffs]},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FourierSeries":
        d = json.loads(text)
        coeffs = [_exact(Fraction(c)) for c in d["coefficients"]]
        if len(coeffs) != d["K"] + 1:
            raise ValueError("coefficient count does not match K")
        return cls(int(d["weight"]), int(d["level"]), coeffs, d.get("name", ""))


def _exact(x: Fraction):
    return x.numerator if x.denominator == 1 else x


# --- series constructions ------------------------------------------------------

def _euler_function(K: int, step: int = 1) -> dict[int, int]:
    """prod (1 - q^(step n)) up to q^K, as a sparse map (pentagonal numbers)."""
    out = {0: 1}
    k = 1
    while True:
        g1, g2 = k * (3 * k - 1) // 2, k * (3 * k + 1) // 2
        if g1 * step > K:
            break
        sign = -1 if k % 2 else 1
        out[g1 * step] = sign
        if g2 * step <= K:
            out[g2 * step] = sign
        k += 1
    return out


def _mul_sparse(series: list[int], sparse: dict[int, int], K: int) -> list[int]:
    out = [0] * (K + 1)
    for e, c in sparse.items():
        for n in range(K + 1 - e):
            if series[n]:
                out[n + e] += c * series[n]
    return out


def _div_sparse(series: list[int], sparse: dict[int, int], K: int) -> list[int]:
    """series / sparse where sparse has constant term 1."""
    out = [0] * (K + 1)
    items = [(e, c) for e, c in sparse.items() if e]
    for n in range(K + 1):
        v = series[n]
        for e, c in items:
            if e > n:
                continue
            v -= c * out[n - e]
        out[n] = v
    return out


def eta_quotient(exponents: dict[int, int], K: int = DEFAULT_K, level: int | None = None,
                 name: str = "") -> FourierSeries:
    """q^s prod_d prod_n (1 - q^(dn))^(r_d) with s = sum d r_d / 24.

    Coefficients are indexed by the true power of q, so the leading
    coefficient 1 sits at n = s (s = 1 for the usual cusp forms).
    """
    total = sum(d * r for d, r in exponents.items())
    if total % 24:
        raise NonIntegralLeadingPower(f"leading power {Fraction(total, 24)} is not an integer")
    s = total // 24
    if s < 0 or K < max(s, 1):
        raise NonIntegralLeadingPower(f"leading power {s} outside 0..K")
    weight2 = sum(exponents.values())
    if weight2 % 2 or weight2 <= 0:
        raise ValueError("eta quotient must have positive even weight")
    L = K - s
    series = [1] + [0] * L
    for d, r in sorted(exponents.items()):
        sparse = _euler_function(L, d)
        for _ in range(abs(r)):
            series = _mul_sparse(series, sparse, L) if r > 0 else _div_sparse(series, sparse, L)
    coeffs = [0] * s + series
    if level is None:
        level = 1
        for d in exponents:
            level = level * d // gcd(level, d)
    label = name or "eta:" + ",".join(f"{d}^{r}" for d, r in sorted(exponents.items()))
    return FourierSeries(weight2 // 2, level, coeffs, label)


def _factor(n: int) -> dict[int, int]:
    out, p = {}, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def primes_upto(K: int) -> list[int]:
    sieve = bytearray([1]) * (K + 1)
    sieve[:2] = b"\x00\x00"[: min(2, K + 1)]
    for p in range(2, isqrt(K) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(range(p * p, K + 1, p)))
    return [p for p in range(K + 1) if sieve[p]]


@dataclass
class LocalFactorSpec:
    level: int
    weight: int
    ap: dict[int, Fraction]

    @classmethod
    def from_json(cls, text: str) -> "LocalFactorSpec":
        d = json.loads(text)
        ap = {int(p): _exact(Fraction(v)) for p, v in d["ap"].items()}
        return cls(int(d["level"]), int(d["weight"]), ap)

    def to_json(self) -> str:
        return json.dumps({"level": self.level, "weight": self.weight,
                           "ap": {str(p): str(Fraction(v)) for p, v in sorted(self.ap.items())}},
                          sort_keys=True)


def euler_expand(spec: LocalFactorSpec, K: int = DEFAULT_K) -> FourierSeries:
    """Coefficients from the local factors: Hecke recursion at p not dividing N,
    a_{q^j} = q^{j(k/2-1)} for q || N, and a_{q^j} = 0 (j >= 1) for q^2 | N."""
    N, k = spec.level, spec.weight
    half = Fraction(k, 2) - 1
    cache: dict[tuple[int, int], Fraction] = {}

    def prime_power(p: int, e: int):
        if (p, e) in cache:
            return cache[p, e]
        if N % p == 0:
            if N % (p * p) == 0:
                v = 0
            else:
                v = Fraction(p) ** (half * e) if half.denominator == 1 else None
                if v is None:
                    raise ValueError("odd weight not supported")
        else:
            if p not in spec.ap:
                raise MissingPrime(f"a_{p} not supplied")
            if e == 0:
                v = 1
            elif e == 1:
                v = spec.ap[p]
            else:
                v = spec.ap[p] * prime_power(p, e - 1) - p ** (k - 1) * prime_power(p, e - 2)
        cache[p, e] = v
        return v

    for p in primes_upto(K):
        if N % p and p not in spec.ap:
            raise MissingPrime(f"a_{p} not supplied")
    coeffs = [0, 1]
    for n in range(2, K + 1):
        v = Fraction(1)
        for p, e in _factor(n).items():
            v *= prime_power(p, e)
        coeffs.append(_exact(v))
    return FourierSeries(k, N, coeffs[:K + 1], f"euler:N={N}")


def chi3(n: int) -> int:
    return (0, 1, -1)[n % 3]


def eisenstein_chi3(K: int = DEFAULT_K) -> FourierSeries:
    """a_n = sum_{dm = n} chi3(d) chi3(m) m, weight 2 on Gamma0(9)."""
    coeffs = [0] * (K + 1)
    for d in range(1, K + 1):
        cd = chi3(d)
        if not cd:
            continue
        for m in range(1, K // d + 1):
            coeffs[d * m] += cd * chi3(m) * m
    return FourierSeries(2, 9, coeffs, "eis-chi3")


def delta(K: int = DEFAULT_K) -> FourierSeries:
    return eta_quotient({1: 24}, K, level=1, name="Delta")


def f11(K: int = DEFAULT_K) -> FourierSeries:
    return eta_quotient({1: 2, 11: 2}, K, level=11, name="eta:1^2,11^2")


def parse_form(text: str, K: int = DEFAULT_K) -> FourierSeries:
    """Form specifiers ``eta:1^2,11^2``, ``euler:<json file>``, ``eis-chi3``, ``delta``."""
    t = text.strip()
    if t == "eis-chi3":
        return eisenstein_chi3(K)
    if t.lower() in ("delta", "eta:1^24"):
        return delta(K)
    if t.startswith("eta:"):
        exps = {}
        for part in t[4:].split(","):
            d, _, r = part.partition("^")
            exps[int(d)] = exps.get(int(d), 0) + int(r or 1)
        return eta_quotient(exps, K)
    if t.startswith("euler:"):
        with open(t[6:], encoding="utf-8") as fh:
            return euler_expand(LocalFactorSpec.from_json(fh.read()), K)
    raise ValueError(f"unknown form {text!r}")


# --- slash action --------------------------------------------------------------

def _act(g: ProjMat, z: complex) -> complex:
    return (g.a * z + g.b) / (g.c * z + g.d)


def slash_eval(f: FourierSeries, g: ProjMat, z: complex, tol: float = DEFAULT_TOL) -> tuple[complex, float]:
    """(f|_k g)(z) = det^(k/2) (cz+d)^(-k) f(gz), with a bound on the truncation error."""
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half plane")
    gz = _act(g, z)
    factor = complex(g.det) ** (f.weight / 2) * (g.c * z + g.d) ** (-f.weight)
    tail = abs(factor) * f.tail_bound(gz.imag)
    if not tail < tol:
        raise PrecisionUnreachable(
            f"tail bound {tail:.3g} at Im(gz) = {gz.imag:.4g} exceeds {tol:g} with K = {f.K}")
    return complex(factor * f(gz)), tail


def sample_points(g: ProjMat, count: int = 5, min_imag: float = MIN_IMAG) -> list[complex]:
    """Deterministic points z with min(Im z, Im gz) >= min_imag."""
    c, d = g.c, g.d
    if c == 0:
        base, ys = 0.0, [0.5, 0.7, 0.9, 1.1, 1.3]
    else:
        base = -d / c
        ys = [s / abs(c) for s in (1.0, 0.97, 1.03, 0.94, 1.06, 0.91, 1.09)]
    shifts = [0.0, 0.003, -0.003, 0.007, -0.007, 0.011, -0.011, 0.17, -0.23, 0.31]
    out = []
    for t in shifts:
        for y in ys:
            z = complex(base + t, y)
            if z.imag >= min_imag and _act(g, z).imag >= min_imag:
                out.append(z)
                break
        if len(out) == count:
            break
    if not out:
        raise PrecisionUnreachable(f"no admissible sample point for {g} (needs |c| <= {1 / min_imag:g})")
    return out


@dataclass
class InvarianceReport:
    matrix: ProjMat
    points: list[complex]
    residuals: list[float]
    tail: float
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol


def check_invariance(f: FourierSeries, g: ProjMat, points: list[complex] | None = None,
                     tol: float = DEFAULT_TOL) -> InvarianceReport:
    pts = points if points is not None else sample_points(g)
    res, tail = [], 0.0
    for z in pts:
        v, t1 = slash_eval(f, g, z, tol)
        w, t2 = slash_eval(f, IDENTITY, z, tol)
        res.append(abs(v - w))
        tail = max(tail, t1 + t2)
    return InvarianceReport(g, pts, res, tail, tol)


@dataclass
class HeckeReport:
    p: int
    estimate: complex
    expected: Fraction | None
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        ok = self.residual < self.tol
        if self.expected is not None:
            ok = ok and abs(self.estimate - float(self.expected)) < self.tol
        return ok


def hecke_eigen_check(f: FourierSeries, p: int, tol: float = DEFAULT_TOL,
                      points: list[complex] | None = None) -> HeckeReport:
    """Least-squares eigenvalue of f|_k T_p, compared with p^(1-k/2) a_p."""
    from .ring import is_prime
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if f.level % p == 0:
        raise ValueError(f"p = {p} divides the level {f.level}")
    mats = [canonicalize(p, 0, 0, 1)] + [canonicalize(1, a, 0, p) for a in range(p)]
    pts = points or [complex(0.11, 0.5), complex(0.23, 0.55), complex(-0.31, 0.6),
                     complex(0.05, 0.65), complex(0.4, 0.5)]
    tf, fz = [], []
    for z in pts:
        tf.append(sum(slash_eval(f, m, z, tol)[0] for m in mats))
        fz.append(slash_eval(f, IDENTITY, z, tol)[0])
    tf, fz = np.array(tf), np.array(fz)
    lam = complex(np.vdot(fz, tf) / np.vdot(fz, fz))
    residual = float(np.max(np.abs(tf - lam * fz)))
    expected = None
    if p <= f.K:
        expected = Fraction(f.coeffs[p]) * Fraction(p) ** (1 - f.weight // 2)
    return HeckeReport(p, lam, expected, residual, tol)


@dataclass
class CuspReport:
    cusp: CuspSpec
    estimate: complex
    tail: float
    y0: float
    samples: int


def cusp_constant_term(f: FourierSeries, cusp: CuspSpec, y0: float | None = None,
                       samples: int = 64, tol: float = DEFAULT_TOL) -> CuspReport:
    """Mean of (f|sigma)(x + i y0) over one period of length ``cusp.width``."""
    if samples < 8:
        raise ValueError("need at least 8 samples")
    if y0 is None:
        y0 = _default_height(cusp)
    w = cusp.width
    xs = cusp.center + w * (np.arange(samples) / samples - 0.5)
    total, tail = 0j, 0.0
    for x in xs:
        v, t = slash_eval(f, cusp.sigma, complex(x, y0), tol)
        total += v
        tail = max(tail, t)
    return CuspReport(cusp, total / samples, tail, y0, samples)


def _default_height(cusp: CuspSpec) -> float:
    """Smallest y0 on a coarse grid keeping Im(sigma z) >= MIN_IMAG across the period."""
    c = cusp.sigma.c
    if c == 0:
        return 0.5
    half = cusp.width / 2
    for y in np.arange(0.25, 40.0, 0.25):
        # worst point is at the end of the period: Im sigma z = y / (c^2 (half^2 + y^2))
        if y >= MIN_IMAG and y / (c * c * (half * half + y * y)) >= MIN_IMAG:
            return float(y)
    raise PrecisionUnreachable(f"no admissible height for cusp {cusp.label}")


def fricke_ratio(f: FourierSeries, z: complex, tol: float = DEFAULT_TOL) -> complex:
    """(f|H_N)(z) / f(z)."""
    return slash_eval(f, fricke(f.level), z, tol)[0] / slash_eval(f, IDENTITY, z, tol)[0]


__all__ = [
    "FourierSeries", "LocalFactorSpec", "CuspSpec", "NonIntegralLeadingPower", "MissingPrime",
    "PrecisionUnreachable", "InvalidCuspData", "eta_quotient", "euler_expand", "eisenstein_chi3",
    "delta", "f11", "parse_form", "slash_eval", "sample_points", "check_invariance",
    "hecke_eigen_check", "cusp_constant_term", "lemma6_gamma", "fricke_ratio", "translation",
]
