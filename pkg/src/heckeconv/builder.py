"""Programmatic construction of derivation scripts.

:class:`ScriptBuilder` replays every step in a live :class:`RelationStore`
while recording it, so a builder that finishes has already produced a
verified script.  The certificates are computed here; the store only checks
them.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .linalg import (IDENTITY, ProjMat, canonicalize, diag, fricke, in_gamma0, inv, mul,
                     power, product, translation)
from .cusps import InvalidCuspData, lemma6_any as _lemma6_any
from .proofs import (AssertGen, Combine, Conj, DerivationScript, Exact, Hyp, ProofError,
                     RelationStore, Weil, hypothesis_element)
from .ring import RingElem, R_sum, atkin_U, format_elem, hecke_T, hecke_T_power, translation_sum
from .symscalar import EPS, ONE, SymScalar, alpha

P_MAT = translation(1)


class BuilderError(ProofError):
    pass


class UnsupportedExponent(BuilderError):
    pass


class NoSolution(BuilderError):
    pass


class InvalidLevelShape(BuilderError):
    pass


def factorize(n: int) -> dict[int, int]:
    out, p = {}, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def left_translation_normal(m: ProjMat) -> tuple[int, ProjMat]:
    """Write ``m = P^t * m0`` with ``m0`` the chosen representative of the
    orbit of ``m`` under left multiplication by translations."""
    a, b, c, d = m.entries()
    if c < 0 or (c == 0 and d < 0):
        a, b, c, d = -a, -b, -c, -d
    t = a // c if c else b // d
    return t, canonicalize(a - t * c, b - t * d, c, d)


def translation_multiplier(x: RingElem) -> tuple[RingElem, RingElem]:
    """Split ``x = (P - 1) * u + rest`` with ``rest`` in orbit-normal form."""
    u: dict[ProjMat, SymScalar] = {}
    rest: dict[ProjMat, SymScalar] = {}
    for m, coef in x.terms.items():
        t, m0 = left_translation_normal(m)
        rest[m0] = rest[m0] + coef if m0 in rest else coef
        # P^t - 1 = (P - 1)(1 + ... + P^(t-1))  or  -(P - 1)(P^t + ... + P^-1)
        js = range(t) if t > 0 else range(t, 0)
        sign = 1 if t > 0 else -1
        for j in js:
            key = mul(power(P_MAT, j), m0)
            u[key] = u[key] + sign * coef if key in u else sign * coef
    return RingElem(u), RingElem(rest)


def _unit_inverse(c: SymScalar) -> SymScalar:
    if c.is_constant() and c.constant():
        return SymScalar.const(1 / c.constant())
    if c * c == ONE:
        return c
    raise BuilderError(f"scalar {c} is not a unit")


def reduced_residues(m: int) -> list[int]:
    """Reduced residues in the symmetric window -(m-1)//2 .. m//2, paired as +-b."""
    bs = [b for b in range(1, m // 2 + 1) if gcd(b, m) == 1]
    out = []
    for b in sorted(bs, reverse=True):
        out.append(b)
    for b in sorted(bs):
        if -b not in out and (-b) % m != b % m:
            out.append(-b)
    return out


def corollary2_terms(m: int, N: int) -> list[tuple[int, int, ProjMat]]:
    """For each reduced b: (b, c, gamma) with gamma = [[m,-b],[-Nc,n]], mn - bcN = 1,
    c of minimal absolute value (positive on ties)."""
    if gcd(m, N) != 1:
        raise NoSolution(f"gcd({m}, {N}) != 1")
    out = []
    for b in reduced_residues(m):
        if gcd(b * N, m) != 1:
            raise NoSolution(f"b={b} not invertible mod {m}")
        if m == 1:
            c = 0
        else:
            c0 = (-pow(b * N, -1, m)) % m
            c = min((c0, c0 - m), key=lambda v: (abs(v), -v))
        n, r = divmod(1 + b * c * N, m)
        if r:
            raise NoSolution(f"no n for m={m}, b={b}, c={c}")
        out.append((b, c, canonicalize(m, -b, -N * c, n)))
    return out


class ScriptBuilder:
    def __init__(self, N: int, title: str = ""):
        self.N = N
        self.script = DerivationScript(N, title=title)
        self.store = RelationStore(N)
        self.units: dict[ProjMat, tuple[str, int, SymScalar]] = {}
        self.cache: dict = {}
        self._count = 0

    # --- primitive steps -----------------------------------------------------

    def _emit(self, step) -> str | None:
        rid = self.store.apply_step(step)
        self.script.steps.append(step)
        if rid is not None:
            self._maybe_unit(rid)
        return rid

    def fresh(self, prefix: str = "r") -> str:
        self._count += 1
        return f"{prefix}{self._count}"

    def el(self, rid: str) -> RingElem:
        return self.store[rid].element

    def _maybe_unit(self, rid: str) -> None:
        x = self.el(rid)
        if len(x) != 2 or IDENTITY not in x.terms:
            return
        (g, y), = [(m, c) for m, c in x.terms.items() if m != IDENTITY]
        if not (y.is_constant() and abs(y.constant()) == 1):
            return
        s = int(y.constant())
        c = -x.terms[IDENTITY] * s
        try:
            _unit_inverse(c)
        except BuilderError:
            return
        self.units.setdefault(g, (rid, s, c))

    def hyp(self, kind: str, arg: int | None = None, mode: str | None = None,
            matrix: ProjMat | None = None, name: str | None = None) -> str:
        return self._emit(Hyp(kind, arg, mode, matrix, name))

    def combine(self, target: RingElem, cert, name: str | None = None) -> str:
        return self._emit(Combine(target, tuple(cert), name or self.fresh()))

    def close(self, target: RingElem, cert=(), name: str | None = None) -> str:
        """Combine, absorbing a residual that vanishes modulo left translations."""
        cert = list(cert)
        total = RingElem()
        for rid, u in cert:
            total = total + self.el(rid) * u
        u, rest = translation_multiplier(target - total)
        if rest:
            raise BuilderError(f"residual is not a translation multiple: {format_elem(rest)}")
        if u:
            cert.append(("P", u))
        return self.combine(target, cert, name)

    def conj(self, rid: str, name: str | None = None) -> str:
        return self._emit(Conj(rid, name or self.fresh()))

    def weil(self, gamma: ProjMat, eps: ProjMat, rid: str, name: str | None = None) -> str:
        return self._emit(Weil(gamma, eps, rid, name or self.fresh()))

    def exact(self, lhs: RingElem, rhs: RingElem) -> str:
        return self._emit(Exact(lhs, rhs, self.fresh("x")))

    def assert_gen(self, m: ProjMat) -> None:
        self._emit(AssertGen(m))

    # --- derived moves -------------------------------------------------------

    def unit(self, g: ProjMat) -> tuple[str, int, SymScalar]:
        try:
            return self.units[g]
        except KeyError:
            raise BuilderError(f"no relation g = scalar known for {g}") from None

    def word(self, factors: list[tuple[ProjMat, int]], name: str | None = None) -> str:
        """From g_i = c_i derive g_1^e_1 ... g_k^e_k = prod c_i^e_i.

        Telescoping: prod g - prod c = sum_i (c_1..c_{i-1}) (g_i - c_i) g_{i+1}..g_k.
        """
        seq = []
        for g, e in factors:
            seq.extend([(g, 1 if e > 0 else -1)] * abs(e))
        mats = [g if e > 0 else inv(g) for g, e in seq]
        cert = []
        prefix = ONE
        for i, (g, e) in enumerate(seq):
            rid, s, c = self.unit(g)
            suffix = RingElem.of(product(mats[i + 1:]))
            if e > 0:
                cert.append((rid, suffix * (prefix * s)))
                prefix = prefix * c
            else:
                ci = _unit_inverse(c)
                cert.append((rid, RingElem.of(inv(g)) * suffix * (-prefix * s * ci)))
                prefix = prefix * ci
        target = RingElem.of(product(mats)) - prefix
        return self.combine(target, cert, name)

    def invariant(self, m: ProjMat, factors: list[tuple[ProjMat, int]], name: str | None = None) -> str:
        """Derive m - 1 from a word for m whose scalar is 1."""
        if product(g if e > 0 else inv(g) for g, e in factors
                   for _ in range(abs(e))) != m:
            raise BuilderError(f"word does not evaluate to {m}")
        rid = self.word(factors, name)
        if self.el(rid) != RingElem.of(m) - 1:
            raise BuilderError(f"word for {m} has scalar other than 1: {self.el(rid)}")
        return rid

    def lmul(self, g: ProjMat, rid: str, name: str | None = None) -> str:
        """g * R from g = c:  g R = (g - c) R + c R."""
        grid, s, c = self.unit(g)
        x = self.el(rid)
        return self.combine(RingElem.of(g) * x, [(grid, x * s), (rid, RingElem.scalar(c))], name)

    # --- standard hypotheses -------------------------------------------------

    def fricke_and_translation(self) -> None:
        """Hypotheses P = 1, H = eps, and the derived W = 1."""
        if "P" not in self.store:
            self.hyp("P")
        if "H" not in self.store:
            self.hyp("H")
        w = canonicalize(1, 0, self.N, 1)
        if w not in self.units:
            h = fricke(self.N)
            # H P^-1 H = W up to scalars
            self.invariant(w, [(h, 1), (P_MAT, -1), (h, 1)], name="W")


# --- recurring moves as builder routines --------------------------------------

def lemma2(sb: ScriptBuilder) -> str:
    """From P = 1, H = eps, T_2 = alpha_2 (N odd) derive M_2 = 1."""
    from .linalg import m2_matrix
    N = sb.N
    sb.fricke_and_translation()
    if "T2" not in sb.store:
        sb.hyp("T", 2)
    t2 = sb.el("T2")
    c = sb.conj("T2")
    x = RingElem.of(canonicalize(2, 1, 0, 1))
    diff = (sb.el(c) - t2) * x
    r = sb.combine(diff, [(c, x), ("T2", -x)])
    w = canonicalize(1, 0, N, 1)
    r2 = sb.lmul(w, r)
    wp = sb.word([(w, 1), (P_MAT, 1)])
    m2 = m2_matrix(N)
    return sb.combine(RingElem.of(m2) - 1, [(r2, RingElem.scalar(1)), (wp, RingElem.scalar(1))],
                      name="M2")


def lemma3(sb: ScriptBuilder) -> str:
    """From H = eps and U_2 = diag(2,1) (2 || N) derive A = -1."""
    from .linalg import a_matrix
    N = sb.N
    sb.fricke_and_translation()
    if "U2" not in sb.store:
        sb.hyp("Uq", 2, "id")
    b = canonicalize(2, 1, 0, 2)
    binv = RingElem.of(inv(b))
    d2 = RingElem.of(diag(2))
    h2n = RingElem.of(fricke(2 * N))
    target = RingElem.of(b) * h2n * binv + EPS
    x = sb.combine(target, [("U2", h2n * binv), ("H", -(d2 * binv)), ("H", binv),
                            ("U2", binv * EPS)])
    hx = sb.lmul(fricke(N), x)
    a = a_matrix(N)
    return sb.combine(RingElem.of(a) + 1, [(hx, RingElem.scalar(1)), ("H", RingElem.scalar(-EPS))],
                      name="A")


def lemma4(sb: ScriptBuilder) -> str:
    """U_2 = 0 (4 | N) is literally B + 1 = 0."""
    sb.fricke_and_translation()
    if "U2" not in sb.store:
        sb.hyp("Uq", 2, "zero")
    return "U2"


def t_power_chain(sb: ScriptBuilder, p: int, lam: int) -> list:
    """Relations T_{p^mu} - a_mu for mu <= lam, a_mu polynomials in alpha_p."""
    key = ("T", p, lam)
    if key in sb.cache:
        return sb.cache[key]
    if f"T{p}" not in sb.store:
        sb.hyp("T", p)
    a = [ONE, alpha(p)]
    ids = [None, f"T{p}"]
    tp = hecke_T(p)
    for mu in range(2, lam + 1):
        a.append(a[mu - 1] * alpha(p) - a[mu - 2] * p)
        target = hecke_T_power(p, mu) - a[mu]
        cert = [(ids[mu - 1], tp), (f"T{p}", RingElem.scalar(a[mu - 1]))]
        if ids[mu - 2] is not None:
            cert.append((ids[mu - 2], RingElem.scalar(-p)))
        name = f"T{p}_{mu}"
        ids.append(name if name in sb.store else sb.close(target, cert, name=name))
    sb.cache[key] = list(zip(ids, a))
    return sb.cache[key]


def prime_power_R(sb: ScriptBuilder, p: int, lam: int) -> tuple[str, RingElem]:
    """R_{p^lam} = sum of scalar multiples of diagonal matrices."""
    key = ("R", p, lam)
    if key in sb.cache:
        return sb.cache[key]
    chain = t_power_chain(sb, p, lam)
    a = [c for _, c in chain]
    D = lambda e: RingElem.of(diag(p ** e))  # noqa: E731
    s_ids = [None]
    for mu in range(1, lam + 1):
        s_mu = RingElem.sum(canonicalize(p ** mu, b, 0, p ** mu) for b in range(p ** mu))
        target = s_mu - D(mu) * a[mu] + D(mu + 1) * a[mu - 1]
        cert = [(chain[mu][0], D(mu))]
        if chain[mu - 1][0] is not None:
            cert.append((chain[mu - 1][0], -D(mu + 1)))
        name = f"S{p}_{mu}"
        s_ids.append(name if name in sb.store else sb.close(target, cert, name=name))
    am2 = a[lam - 2] if lam >= 2 else SymScalar()
    diag_part = (D(lam) * a[lam] - D(lam + 1) * a[lam - 1] - D(lam - 1) * a[lam - 1]
                 + D(lam) * am2)
    target = R_sum(p ** lam) - diag_part
    cert = [(s_ids[lam], RingElem.scalar(1))]
    if lam >= 2:
        cert.append((s_ids[lam - 1], RingElem.scalar(-1)))
    if lam == 1 and sb.el(s_ids[1]) == target:
        rid = s_ids[1]
    else:
        rid = sb.close(target, cert, name=f"R{p ** lam}")
    sb.cache[key] = (rid, diag_part)
    return rid, diag_part


def theorem2(sb: ScriptBuilder, n: int, reps: list[int] | None = None,
             lam_max: int = 3) -> str:
    """Derive H_N R_n H_{n^2 N} - R_n (R_n over ``reps`` if given)."""
    N = sb.N
    if gcd(n, N) != 1:
        raise BuilderError(f"gcd({n}, {N}) != 1")
    sb.fricke_and_translation()
    parts = []
    for p, lam in sorted(factorize(n).items()):
        if lam > lam_max:
            raise UnsupportedExponent(f"{p}^{lam} exceeds supported exponent {lam_max}")
        parts.append((p ** lam, *prime_power_R(sb, p, lam)))
    if not parts:
        raise BuilderError("n must exceed 1")
    m1, rid, dsum = parts[0]
    for m2, rid2, dsum2 in parts[1:]:
        m = m1 * m2
        new_d = dsum2 * dsum
        target = R_sum(m) - new_d
        rid = sb.close(target, [(rid, R_sum(m2)), (rid2, dsum)], name=f"R{m}")
        m1, dsum = m, new_d
    std = R_sum(n)
    if reps is not None:
        alt = R_sum(n, reps)
        if alt != std:
            rid = sb.close(alt - dsum, [(rid, RingElem.scalar(1))])
        std = alt
    c = sb.conj(rid)
    dn = RingElem.of(diag(n * n))
    h, hp = RingElem.of(fricke(N)), RingElem.of(fricke(n * n * N))
    target = h * std * hp - std
    return sb.combine(target, [(c, dn), (rid, RingElem.scalar(-1))], name=f"Th2_{n}")


def corollary2(sb: ScriptBuilder, m: int) -> str:
    """Derive sum_b (1 - gamma_b) beta(b/m) for the reduced residues b."""
    terms = corollary2_terms(m, sb.N)
    cs = [c for _, c, _ in terms]
    th = theorem2(sb, m, reps=cs)
    one = RingElem.scalar(1)
    target = RingElem()
    for b, _, g in terms:
        target = target + (one - RingElem.of(g)) * RingElem.of(translation(Fraction(b, m)))
    return sb.close(target, [(th, RingElem.scalar(-1))], name=f"C2_{m}")


def _beta(x) -> RingElem:
    return RingElem.of(translation(Fraction(x)))


def elliptic_pair(sb: ScriptBuilder, m: int, n: int, rel_m: str, rel_n: str,
                  gamma: ProjMat, gamma_p: ProjMat, first: str = "gamma") -> tuple[str, str]:
    """From
        rel_m = (1 - gamma') beta(1/m) + (1 - gamma) beta(-1/m)
        rel_n = (1 - gamma^-1) beta(1/n) + (1 - gamma'^-1) beta(-1/n)
    derive (1 - x)(1 - eps) for x = gamma (or gamma'), apply the elliptic rule,
    and recover the partner.  Returns ids of 1 - gamma and 1 - gamma'.
    """
    one = RingElem.scalar(1)
    G, Gp = RingElem.of(gamma), RingElem.of(gamma_p)
    expect_m = (one - Gp) * _beta(Fraction(1, m)) + (one - G) * _beta(Fraction(-1, m))
    expect_n = ((one - RingElem.of(inv(gamma))) * _beta(Fraction(1, n))
                + (one - RingElem.of(inv(gamma_p))) * _beta(Fraction(-1, n)))
    if sb.el(rel_m) != expect_m or sb.el(rel_n) != expect_n:
        raise BuilderError("relations do not have the paired shape")
    if first == "gamma":
        x, eps = gamma, product([inv(gamma), translation(Fraction(2, n)), gamma_p,
                                 translation(Fraction(2, m))])
        cert = [(rel_m, _beta(Fraction(1, m))),
                (rel_n, _beta(Fraction(1, n)) * Gp * _beta(Fraction(2, m)))]
    else:
        x, eps = gamma_p, product([inv(gamma_p), translation(Fraction(-2, n)), gamma,
                                   translation(Fraction(-2, m))])
        cert = [(rel_m, _beta(Fraction(-1, m))),
                (rel_n, _beta(Fraction(-1, n)) * G * _beta(Fraction(-2, m)))]
    X = RingElem.of(x)
    pre = sb.combine((one - X) * (one - RingElem.of(eps)), cert)
    w = sb.weil(x, eps, pre)
    if first == "gamma":
        other = sb.combine(one - Gp, [(rel_m, _beta(Fraction(-1, m))),
                                      (w, -_beta(Fraction(-2, m)))])
        return w, other
    other = sb.combine(one - G, [(rel_m, _beta(Fraction(1, m))), (w, -_beta(Fraction(2, m)))])
    return other, w


def corollary3(sb: ScriptBuilder, m: int, n: int, first: str = "gamma") -> dict[str, str]:
    """gamma = [[m,1],[N,n]] with mn = N + 1: derive gamma, gamma' and inverses = 1."""
    N = sb.N
    if m * n != N + 1:
        raise BuilderError(f"{m}*{n} != {N}+1")
    gamma = canonicalize(m, 1, N, n)
    gamma_p = canonicalize(m, -1, -N, n)
    rm = corollary2(sb, m)
    rn = rm if n == m else corollary2(sb, n)
    g_id, gp_id = elliptic_pair(sb, m, n, rm, rn, gamma, gamma_p, first)
    out = {"gamma": g_id, "gamma_p": gp_id}
    if n != m:
        out["gamma_inv"] = sb.word([(gamma, -1)])
        out["gamma_p_inv"] = sb.word([(gamma_p, -1)])
    return out


# --- vanishing at the cusps 1/r -------------------------------------------------

def theorem3_level_ok(N: int) -> bool:
    e = 0
    while N % 2 == 0:
        N //= 2
        e += 1
    return e <= 3 and all(v == 1 for v in factorize(N).values())


def _full_sum(M: int) -> RingElem:
    return translation_sum(M, range(M))


def theorem3(sb: ScriptBuilder, r: int) -> str | None:
    N = sb.N
    if not theorem3_level_ok(N) or N % r:
        raise InvalidLevelShape(f"N={N}, r={r} is not a supported cusp shape")
    Q = N // r
    sb.fricke_and_translation()
    fq = factorize(Q)
    for q in fq:
        if f"U{q}" not in sb.store:
            sb.hyp("Uq", q, "zero" if N % (q * q) == 0 else "id")

    # relations S_M - C(M) for prime powers M dividing Q
    done: dict = {}

    def prime_power(q: int, f: int) -> tuple[str | None, RingElem]:
        if (q, f) not in done:
            done[q, f] = _prime_power(q, f)
        return done[q, f]

    def _prime_power(q: int, f: int) -> tuple[str | None, RingElem]:
        if f == 0:
            return None, RingElem.scalar(1)
        zero = N % (q * q) == 0
        value = RingElem() if zero else RingElem.of(diag(q ** f))
        if f == 1:
            return f"U{q}", value
        if not zero:
            raise InvalidLevelShape(f"{q}^{f} divides N/r but {q}^2 does not divide N")
        y = translation_sum(q ** f, range(q ** (f - 1)))
        rid = sb.combine(_full_sum(q ** f), [(f"U{q}", y)], name=f"S{q}_{f}")
        return rid, value

    full: dict[int, tuple[str | None, RingElem]] = {}
    for M in divisors(Q):
        fm = factorize(M)
        rid, value, cur = None, RingElem.scalar(1), 1
        for q, f in sorted(fm.items()):
            rid2, val2 = prime_power(q, f)
            if rid is None:
                rid, value, cur = rid2, val2, q ** f
                continue
            new_val = val2 * value
            cur *= q ** f
            target = _full_sum(cur) - new_val
            rid = sb.close(target, [(rid, _full_sum(q ** f)), (rid2, value)])
            value = new_val
        full[M] = (rid, value)

    reps = [a for a in range(Q) if gcd(a, Q) == 1]
    prim = translation_sum(Q, reps)
    rhs = RingElem()
    cert = []
    for d in divisors(Q):
        mu = mobius(d)
        if mu == 0:
            continue
        rid, value = full[Q // d]
        rhs = rhs + value * mu
        if rid is not None:
            cert.append((rid, RingElem.scalar(mu)))
    target = prim - rhs
    if not target:
        sb.exact(prim, rhs)
        return None
    base = sb.close(target, cert, name=f"Th3_sum_{r}")
    c = sb.conj(base)
    cert = [(c, RingElem.scalar(1))]
    final = RingElem()
    for a in reps:
        low = canonicalize(1, 0, -a * r, 1)
        gamma, b, d = _lemma6_any(N, r, -a)
        final = final + RingElem.of(canonicalize(1, b, -r, d))
        if gamma == IDENTITY:
            continue
        gid = next((rid for rid in sb.store.order
                    if sb.el(rid) == RingElem.of(gamma) - 1), None)
        if gid is None:
            gid = sb.hyp("G", matrix=gamma, name=sb.fresh("G"))
        cert.append((gid, RingElem.of(low)))
    hD = RingElem()
    for m, coef in rhs.terms.items():
        hD = hD + RingElem.of(mul(mul(fricke(N), m), fricke(N)), coef)
    result = sb.combine(final - hD, cert, name=f"Th3_{r}")
    lower = RingElem.of(canonicalize(1, 0, -r, 1))
    shifted = translation_sum(1, [_lemma6_any(N, r, -a)[1] for a in reps])
    sb.exact(sb.el(result), lower * shifted - hD)
    return result


# --- level by level ----------------------------------------------------------------

LEVELS = (5, 6, 7, 8, 9, 10, 11, 12, 14, 15, 16, 17, 23)

# Generator lists as displayed, as word expressions (see linalg.eval_matrix_expr).
GENERATORS: dict[int, tuple[str, ...]] = {
    5: ("P", "W", "M(2)"),
    6: ("P", "W", "A^-1 W A"),
    7: ("P", "W", "M(2)"),
    8: ("P", "W", "B^-1 W B"),
    9: ("P", "W", "M(2)"),
    10: ("P", "W", "(W A)^2", "H (W A)^2 H", "A^-1 W^-1 A P^-1"),
    11: ("P", "M(2)", "M(3)"),
    12: ("P", "W", "B W^-1 B", "H B^-1 W B^-1 H", "B H B W^-1 B H B"),
    14: ("P", "W", "M(3)", "M(-3)", "M(13,6)"),
    15: ("P", "W", "M(2)", "M(4)", "M(11,4)"),
    16: ("P", "W", "B W^-1 B", "(B H)^4", "(B^-1 H)^4"),
    17: ("P", "W", "M(2)", "M(3)", "M(6)"),
    23: ("P", "W", "M(2)", "M(3)", "M(4)", "M(6)"),
}


class UnsupportedLevel(BuilderError):
    pass


def _w(*pairs):
    return list(pairs)


def _level_5_7_9(sb):
    lemma2(sb)


def _level_6_10(sb):
    from .linalg import a_matrix
    N = sb.N
    lemma3(sb)
    A, W, H = a_matrix(N), canonicalize(1, 0, N, 1), fricke(N)
    if N == 6:
        sb.invariant(product([inv(A), W, A]), _w((A, -1), (W, 1), (A, 1)))
        return
    wa2 = _w((W, 1), (A, 1), (W, 1), (A, 1))
    sb.invariant(product([W, A, W, A]), wa2)
    sb.invariant(product([H, W, A, W, A, H]), [(H, 1)] + wa2 + [(H, 1)])
    sb.invariant(product([inv(A), inv(W), A, inv(P_MAT)]),
                 _w((A, -1), (W, -1), (A, 1), (P_MAT, -1)))


def _level_8_12_16(sb):
    from .linalg import B_MATRIX as B
    N = sb.N
    lemma4(sb)
    W, H = canonicalize(1, 0, N, 1), fricke(N)
    words = {
        8: [_w((B, -1), (W, 1), (B, 1))],
        12: [_w((B, 1), (W, -1), (B, 1)),
             _w((H, 1), (B, -1), (W, 1), (B, -1), (H, 1)),
             _w((B, 1), (H, 1), (B, 1), (W, -1), (B, 1), (H, 1), (B, 1))],
        16: [_w((B, 1), (W, -1), (B, 1)),
             _w((B, 1), (H, 1)) * 4,
             _w((B, -1), (H, 1)) * 4],
    }[N]
    for w in words:
        sb.invariant(product(g if e > 0 else inv(g) for g, e in w), w)


def _level_11(sb):
    lemma2(sb)
    corollary3(sb, 3, 4, first="prime")


def _level_17(sb):
    lemma2(sb)
    corollary3(sb, 3, 6)


def _level_14(sb):
    from .linalg import a_matrix
    N = 14
    lemma3(sb)
    A, W = a_matrix(N), canonicalize(1, 0, N, 1)
    sb.invariant(product([inv(A), inv(W), A, P_MAT]), _w((A, -1), (W, -1), (A, 1), (P_MAT, 1)))
    g2 = canonicalize(3, 1, 14, 5)
    g1 = canonicalize(3, -1, -14, 5)
    r3 = corollary2(sb, 3)
    r5 = corollary2(sb, 5)
    # remove the (W A)^2 and (A P)^2 terms
    wa = sb.invariant(product([W, A, W, A]), _w((W, 1), (A, 1), (W, 1), (A, 1)))
    ap = sb.invariant(product([A, P_MAT, A, P_MAT]), _w((A, 1), (P_MAT, 1), (A, 1), (P_MAT, 1)))
    one = RingElem.scalar(1)
    red = ((one - RingElem.of(inv(g2))) * _beta(Fraction(1, 5))
           + (one - RingElem.of(inv(g1))) * _beta(Fraction(-1, 5)))
    r5r = sb.combine(red, [(r5, one), (wa, _beta(Fraction(2, 5))), (ap, _beta(Fraction(-2, 5)))])
    elliptic_pair(sb, 3, 5, r3, r5r, g2, g1, first="prime")


def _level_15(sb):
    from .linalg import m2_matrix
    N = 15
    lemma2(sb)
    corollary3(sb, 4, 4)
    M2, W = m2_matrix(N), canonicalize(1, 0, N, 1)
    X = canonicalize(11, 4, 30, 11)
    r8 = corollary2(sb, 8)
    u1 = sb.word(_w((M2, -1)))
    u2 = sb.word(_w((P_MAT, 1), (M2, -1), (W, 1)))
    v1 = sb.word(_w((M2, 1), (P_MAT, -1)))
    v2 = sb.word(_w((W, -1), (M2, 1)))
    one = RingElem.scalar(1)
    Xe, Xi = RingElem.of(X), RingElem.of(inv(X))
    b = lambda k: _beta(Fraction(k, 8))  # noqa: E731
    red = (one - Xi) * b(3) + (one - Xe) * b(-3)
    r = sb.combine(red, [(r8, one), (u1, b(1)), (u2, b(-1)), (v1, Xe * b(-3)), (v2, Xi * b(3))])
    eps = mul(inv(X), translation(Fraction(3, 4)))
    pre = sb.combine((one - Xe) * (one - RingElem.of(eps)), [(r, b(3))])
    sb.weil(X, eps, pre, name="M11_4")


def _level_23(sb):
    from .linalg import m_matrix
    N = 23
    lemma2(sb)
    ids = corollary3(sb, 4, 6)
    W = canonicalize(1, 0, N, 1)
    M3, Mm3 = m_matrix(3, 1, N), m_matrix(-3, 1, N)
    M6, Mm6 = m_matrix(6, 1, N), m_matrix(-6, 1, N)
    Mm2 = m_matrix(-2, 1, N)
    g = canonicalize(10, 3, 23, 7)
    sb.invariant(Mm2, _w((W, -1), (m_matrix(2, 1, N), 1), (P_MAT, -1)))
    assert product([W, Mm2, g]) == M3 and product([Mm6, M6, Mm3, g]) == IDENTITY
    r3 = corollary2(sb, 3)
    y = sb.word(_w((M6, -1), (Mm6, -1)))
    z = sb.word(_w((Mm2, -1), (W, -1)))
    one = RingElem.scalar(1)
    G = RingElem.of(g)
    t1 = sb.combine((one - RingElem.of(M3)) + (one - RingElem.of(Mm3)) * G,
                    [(z, RingElem.of(M3)), (y, -one)])
    eps = mul(translation(Fraction(-2, 3)), g)
    pre = sb.combine((one - RingElem.of(M3)) * (one - RingElem.of(eps)),
                     [(t1, one), (r3, -(_beta(Fraction(-1, 3)) * G))])
    sb.weil(M3, eps, pre, name="M3")
    del ids


_PLANS = {5: _level_5_7_9, 7: _level_5_7_9, 9: _level_5_7_9, 6: _level_6_10, 10: _level_6_10,
          8: _level_8_12_16, 12: _level_8_12_16, 16: _level_8_12_16, 11: _level_11,
          14: _level_14, 15: _level_15, 17: _level_17, 23: _level_23}


def generator_matrices(N: int) -> list[ProjMat]:
    from .linalg import eval_matrix_expr
    if N not in GENERATORS:
        raise UnsupportedLevel(f"unsupported level {N}")
    return [eval_matrix_expr(e, N) for e in GENERATORS[N]]


def build_level(N: int) -> ScriptBuilder:
    """Builder holding the complete, already verified derivation for level N."""
    if N not in _PLANS:
        raise UnsupportedLevel(f"unsupported level {N}")
    sb = ScriptBuilder(N, title=f"Gamma0({N}) generators")
    sb.fricke_and_translation()
    _PLANS[N](sb)
    for m in generator_matrices(N):
        sb.assert_gen(m)
    return sb


def gen_theorem2_script(n: int, N: int, lam_max: int = 3,
                        reps: list[int] | None = None) -> DerivationScript:
    if lam_max > 3:
        raise UnsupportedExponent("exponents above 3 are not supported")
    sb = ScriptBuilder(N, title=f"Hecke relation for n={n}")
    theorem2(sb, n, reps, lam_max=lam_max)
    return sb.script


def gen_corollary2_script(m: int, N: int) -> DerivationScript:
    sb = ScriptBuilder(N, title=f"elliptic relation for m={m}")
    corollary2(sb, m)
    return sb.script


def gen_theorem3_script(N: int, r: int) -> DerivationScript:
    sb = ScriptBuilder(N, title=f"cusp 1/{r}")
    theorem3(sb, r)
    return sb.script


# --- shipped scripts ---------------------------------------------------------------

GENERATORS_VERSION = 1


def render_level(N: int) -> str:
    from .proofs import format_script
    return format_script(build_level(N).script)


def render_generators() -> str:
    from .linalg import format_matrix
    lines = [f"# generator lists, version {GENERATORS_VERSION}", "# level | expression | matrix"]
    for N in LEVELS:
        for expr, m in zip(GENERATORS[N], generator_matrices(N)):
            lines.append(f"{N} | {expr} | {format_matrix(m)}")
    return "\n".join(lines) + "\n"


def builtin_script_text(N: int) -> str:
    from importlib.resources import files
    if N not in LEVELS:
        raise UnsupportedLevel(f"unsupported level {N}")
    return files("heckeconv").joinpath("data", "scripts", f"level{N:02d}.ccv").read_text("utf-8")


def write_builtin(root) -> list:
    """Regenerate the shipped level scripts and generator table under ``root``."""
    from pathlib import Path
    root = Path(root)
    (root / "scripts").mkdir(parents=True, exist_ok=True)
    out = []
    for N in LEVELS:
        path = root / "scripts" / f"level{N:02d}.ccv"
        path.write_text(render_level(N), encoding="utf-8")
        out.append(path)
    path = root / "generators.txt"
    path.write_text(render_generators(), encoding="utf-8")
    out.append(path)
    return out


if __name__ == "__main__":
    import sys
    from pathlib import Path
    target = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data"
    for p in write_builtin(target):
        print(p)
