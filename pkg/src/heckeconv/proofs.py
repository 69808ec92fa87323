"""Certificate-checked derivations modulo the annihilator right ideal.

A relation is a group-ring element known to annihilate f under the slash
action.  The annihilator is a right ideal, so from relations R_i anything of
the form sum R_i * u_i follows; every step here reduces to checking such a
combination exactly.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from typing import Iterable

from .expr import ExprSyntaxError, parse_cert, parse_elem
from .linalg import (MatrixSyntaxError, ProjMat, classify_order, fricke,
                     format_matrix, in_gamma0, parse_matrix, w_matrix)
from .ring import RingElem, atkin_U, format_elem, hecke_T, is_prime
from .symscalar import EPS, SymScalar, UnknownSymbol, alpha

EVEN_WEIGHT = "k even (scalar matrices act trivially)"
ELLIPTIC_RULE = "f holomorphic and nonconstant (elliptic fixed-point rule applied)"
GAMMA0_INVARIANCE = "f invariant under Gamma0(N)"


class ProofError(Exception):
    """Base class; ``step`` is the 1-based step index when known."""

    def __init__(self, message: str, step: int | None = None, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.step = step
        self.line = line

    def __str__(self):
        loc = []
        if self.line is not None:
            loc.append(f"line {self.line}")
        if self.step is not None:
            loc.append(f"step {self.step}")
        return f"{', '.join(loc)}: {self.message}" if loc else self.message


class CertificateMismatch(ProofError):
    def __init__(self, message: str, residual: RingElem | None = None, **kw):
        super().__init__(message, **kw)
        self.residual = residual


class SideConditionFailed(ProofError):
    pass


class UnknownRelationId(ProofError):
    pass


class InconsistentLevel(ProofError):
    pass


class ScriptSyntaxError(ProofError):
    pass


# --- relations and steps ----------------------------------------------------

@dataclass
class Relation:
    element: RingElem
    id: str
    provenance: str  # Hypothesis, Exact, Combine, WeilRule, Macro
    assumptions: frozenset = frozenset()
    cert: tuple = ()  # ((id, multiplier), ...) for Combine and Macro


@dataclass(frozen=True)
class Hyp:
    kind: str  # P, H, W, T, Uq, G
    arg: int | None = None
    mode: str | None = None  # "id" / "zero" for Uq
    matrix: ProjMat | None = None
    name: str | None = None


@dataclass(frozen=True)
class Exact:
    lhs: RingElem
    rhs: RingElem
    name: str | None = None


@dataclass(frozen=True)
class Combine:
    target: RingElem
    cert: tuple  # ((id, RingElem), ...)
    name: str | None = None


@dataclass(frozen=True)
class Conj:
    source: str
    name: str | None = None


@dataclass(frozen=True)
class Weil:
    gamma: ProjMat
    eps: ProjMat
    source: str
    name: str | None = None


@dataclass(frozen=True)
class AssertGen:
    matrix: ProjMat


def hypothesis_element(N: int, hyp: Hyp) -> RingElem:
    k = hyp.kind
    if k == "P":
        return RingElem.of(parse_matrix("[1,1;0,1]")) - 1
    if k == "H":
        return RingElem.of(fricke(N)) - EPS
    if k == "W":
        return RingElem.of(w_matrix(N)) - 1
    if k == "T":
        p = hyp.arg
        if not is_prime(p) or N % p == 0:
            raise InconsistentLevel(f"T_{p} hypothesis needs a prime not dividing N={N}")
        return hecke_T(p) - alpha(p)
    if k == "Uq":
        q = hyp.arg
        if not is_prime(q) or N % q:
            raise InconsistentLevel(f"U_{q} hypothesis needs a prime dividing N={N}")
        if hyp.mode == "zero":
            if N % (q * q):
                raise InconsistentLevel(f"U_{q} = 0 needs {q * q} | {N}")
            return atkin_U(q)
        if N % (q * q) == 0:
            raise InconsistentLevel(f"U_{q} = diag({q},1) needs {q} || {N}")
        return atkin_U(q) - RingElem.of(parse_matrix(f"[{q},0;0,1]"))
    if k == "G":
        if not in_gamma0(hyp.matrix, N):
            raise InconsistentLevel(f"{format_matrix(hyp.matrix)} is not in Gamma0({N})")
        return RingElem.of(hyp.matrix) - 1
    raise InconsistentLevel(f"unknown hypothesis kind {k!r}")


def default_hyp_id(hyp: Hyp) -> str:
    if hyp.name:
        return hyp.name
    if hyp.kind in ("T", "Uq"):
        return f"{hyp.kind[0]}{hyp.arg}"
    return hyp.kind


def weil_element(gamma: ProjMat, eps: ProjMat) -> RingElem:
    one = RingElem.scalar(1)
    return (one - RingElem.of(gamma)) * (one - RingElem.of(eps))


class RelationStore:
    """Append-only proof state for one level."""

    def __init__(self, N: int):
        if N < 1:
            raise InconsistentLevel(f"bad level {N}")
        self.N = N
        self.relations: dict[str, Relation] = {}
        self.order: list[str] = []
        self.assumptions: set[str] = {EVEN_WEIGHT}
        self.log: list[str] = []
        self.residuals: list[dict] = []
        self.assertions: list[ProjMat] = []
        self.steps = 0
        self.trace = False

    def __len__(self):
        return len(self.relations)

    def __getitem__(self, rid: str) -> Relation:
        try:
            return self.relations[rid]
        except KeyError:
            raise UnknownRelationId(f"unknown relation id {rid!r}") from None

    def __contains__(self, rid: str) -> bool:
        return rid in self.relations

    def _fresh(self, name: str | None) -> str:
        if name:
            if name in self.relations:
                raise ProofError(f"relation id {name!r} already defined")
            return name
        return f"s{self.steps}"

    def _add(self, rel: Relation) -> str:
        self.relations[rel.id] = rel
        self.order.append(rel.id)
        return rel.id

    def add_hypothesis(self, hyp: Hyp) -> str:
        el = hypothesis_element(self.N, hyp)
        rid = default_hyp_id(hyp)
        if rid in self.relations:
            raise ProofError(f"relation id {rid!r} already defined")
        assumptions = frozenset({GAMMA0_INVARIANCE}) if hyp.kind == "G" else frozenset()
        if hyp.kind == "G":
            self.assumptions.add(GAMMA0_INVARIANCE)
        self.log.append(f"hyp {rid}: {format_elem(el)}")
        return self._add(Relation(el, rid, "Hypothesis", assumptions))

    def _check_cert(self, target: RingElem, cert) -> RingElem:
        total = RingElem()
        for rid, mult in cert:
            total = total + self[rid].element * mult
        return target - total

    def _record(self, kind: str, rid: str, residual: RingElem):
        entry = {"step": self.steps, "kind": kind, "id": rid,
                 "residual": format_elem(residual), "terms": len(residual)}
        self.residuals.append(entry)
        if self.trace:
            self.log.append(f"step {self.steps} {kind} {rid}: residual {entry['residual']}")

    def _assumptions_of(self, ids: Iterable[str]) -> frozenset:
        out = set()
        for rid in ids:
            out |= self[rid].assumptions
        return frozenset(out)

    def apply_step(self, step) -> str | None:
        self.steps += 1
        n = self.steps
        try:
            return self._apply(step)
        except ProofError as e:
            if e.step is None:
                e.step = n
            raise

    def _apply(self, step) -> str | None:
        if isinstance(step, Hyp):
            return self.add_hypothesis(step)
        if isinstance(step, Exact):
            diff = step.lhs - step.rhs
            rid = self._fresh(step.name)
            self._record("exact", rid, diff)
            if diff:
                raise CertificateMismatch(f"exact identity fails, residual {format_elem(diff)}",
                                          residual=diff)
            return self._add(Relation(RingElem(), rid, "Exact"))
        if isinstance(step, Combine):
            residual = self._check_cert(step.target, step.cert)
            rid = self._fresh(step.name)
            self._record("combine", rid, residual)
            if residual:
                raise CertificateMismatch(
                    f"certificate leaves residual {format_elem(residual)}", residual=residual)
            if not step.target:
                raise CertificateMismatch("combine target is zero; use an exact step")
            used = [r for r, _ in step.cert]
            return self._add(Relation(step.target, rid, "Combine",
                                      self._assumptions_of(used), tuple(step.cert)))
        if isinstance(step, Conj):
            return self._conj(step)
        if isinstance(step, Weil):
            return self._weil(step)
        if isinstance(step, AssertGen):
            self.assert_generator(step.matrix)
            return None
        raise ProofError(f"unknown step {step!r}")

    def _conj(self, step: Conj) -> str:
        # H R H = (H - eps) * (R H) + R * (eps H), both right-ideal multiples.
        if "H" not in self.relations or self["H"].element != hypothesis_element(self.N, Hyp("H")):
            raise SideConditionFailed("conjugation needs the hypothesis H = eps")
        src = self[step.source]
        h = RingElem.of(fricke(self.N))
        target = h * src.element * h
        cert = (("H", src.element * h), (step.source, EPS * h))
        residual = self._check_cert(target, cert)
        rid = self._fresh(step.name)
        self._record("conj", rid, residual)
        if residual:
            raise CertificateMismatch("conjugation expansion failed", residual=residual)
        return self._add(Relation(target, rid, "Macro",
                                  self._assumptions_of(["H", step.source]), cert))

    def _weil(self, step: Weil) -> str:
        src = self[step.source]
        cls = classify_order(step.eps)
        if cls.kind != "EllipticInfinite":
            raise SideConditionFailed(f"{format_matrix(step.eps)} is {cls}, not elliptic of infinite order")
        if step.gamma.det != 1:
            raise SideConditionFailed(f"{format_matrix(step.gamma)} does not have determinant 1")
        expected = weil_element(step.gamma, step.eps)
        diff = src.element - expected
        rid = self._fresh(step.name)
        self._record("weil", rid, diff)
        if diff:
            raise CertificateMismatch(
                f"relation {step.source} is not exactly (1-gamma)(1-eps)", residual=diff)
        self.assumptions.add(ELLIPTIC_RULE)
        el = RingElem.scalar(1) - RingElem.of(step.gamma)
        return self._add(Relation(el, rid, "WeilRule", src.assumptions | {ELLIPTIC_RULE},
                                  ((step.source, None),)))

    def proves_invariance(self, m: ProjMat) -> str | None:
        """Id of a stored relation equal to +-(m - 1), if any."""
        target = RingElem.of(m) - 1
        for rid in self.order:
            el = self.relations[rid].element
            if el == target or el == -target:
                return rid
        return None

    def assert_generator(self, m: ProjMat) -> str:
        if not in_gamma0(m, self.N):
            raise SideConditionFailed(f"{format_matrix(m)} is not in Gamma0({self.N})")
        rid = self.proves_invariance(m)
        if rid is None:
            raise SideConditionFailed(f"no relation establishes {format_matrix(m)} = 1")
        self.assertions.append(m)
        return rid

    # --- audit ---------------------------------------------------------------

    def flatten(self, rid: str, _memo: dict | None = None) -> dict[str, RingElem]:
        """Express relation ``rid`` as sum base_i * u_i over base relations.

        Bases are hypotheses and elliptic-rule promotions.
        """
        memo = {} if _memo is None else _memo
        if rid in memo:
            return memo[rid]
        rel = self[rid]
        if rel.provenance in ("Hypothesis", "WeilRule"):
            out = {rid: RingElem.scalar(1)}
        else:
            out: dict[str, RingElem] = {}
            for src, mult in rel.cert:
                for base, u in self.flatten(src, memo).items():
                    v = u * mult
                    out[base] = out[base] + v if base in out else v
            out = {b: u for b, u in out.items() if u}
        memo[rid] = out
        return out

    def audit(self, rid: str) -> RingElem:
        """Residual of the flattened certificate for ``rid`` (zero when sound)."""
        total = RingElem()
        for base, u in self.flatten(rid).items():
            total = total + self[base].element * u
        return self[rid].element - total


def new_session(N: int, hypotheses: Iterable[Hyp]) -> RelationStore:
    store = RelationStore(N)
    for h in hypotheses:
        store.apply_step(h)
    return store


def apply_step(store: RelationStore, step) -> RelationStore:
    store.apply_step(step)
    return store


# --- script DSL ---------------------------------------------------------------

@dataclass
class DerivationScript:
    N: int
    steps: list = field(default_factory=list)
    lines: list = field(default_factory=list)  # source line per step
    title: str = ""


_AS = re.compile(r"\s+as\s+([A-Za-z_][A-Za-z_0-9]*)\s*$")


def _split_as(text: str) -> tuple[str, str | None]:
    m = _AS.search(text)
    if m:
        return text[:m.start()], m.group(1)
    return text, None


def parse_script(text: str) -> DerivationScript:
    script = None
    title: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            # comments above the header form the title
            if script is None and raw.lstrip().startswith("#"):
                title.append(raw.lstrip()[1:].strip())
            continue
        try:
            step = _parse_line(line, script)
        except ProofError as e:
            e.line = lineno
            raise
        except (ExprSyntaxError, MatrixSyntaxError, UnknownSymbol, ValueError) as e:
            raise ScriptSyntaxError(str(e), line=lineno) from None
        if isinstance(step, DerivationScript):
            if script is not None:
                raise ScriptSyntaxError("duplicate session header", line=lineno)
            script = step
            script.title = "\n".join(title)
            continue
        if script is None:
            raise ScriptSyntaxError("script must start with 'session N=<int>'", line=lineno)
        script.steps.append(step)
        script.lines.append(lineno)
    if script is None:
        raise ScriptSyntaxError("empty script")
    return script


def _parse_line(line: str, script):
    head, _, rest = line.partition(" ")
    rest = rest.strip()
    if head == "session":
        m = re.fullmatch(r"N\s*=\s*(\d+)", rest)
        if not m:
            raise ScriptSyntaxError(f"bad session header {line!r}")
        return DerivationScript(int(m.group(1)))
    if head == "hyp":
        rest, name = _split_as(rest)
        parts = rest.split()
        kind = parts[0] if parts else ""
        if kind in ("P", "H", "W") and len(parts) == 1:
            return Hyp(kind, name=name)
        if kind == "T" and len(parts) == 2:
            return Hyp("T", int(parts[1]), name=name)
        if kind == "Uq" and len(parts) == 3 and parts[2] in ("id", "zero"):
            return Hyp("Uq", int(parts[1]), parts[2], name=name)
        if kind == "G" and len(parts) == 2:
            return Hyp("G", matrix=parse_matrix(parts[1]), name=name)
        raise ScriptSyntaxError(f"bad hypothesis {line!r}")
    if head == "step":
        kind, _, body = rest.partition(" ")
        body, name = _split_as(body.strip())
        if kind == "exact":
            lhs, sep, rhs = body.partition("==")
            if not sep:
                raise ScriptSyntaxError("exact step needs '=='")
            return Exact(parse_elem(lhs), parse_elem(rhs), name)
        if kind == "combine":
            m = re.fullmatch(r"target\s*=\s*(.*?)\s+cert\s*=\s*(.*)", body)
            if not m:
                raise ScriptSyntaxError("combine step needs target= and cert=")
            return Combine(parse_elem(m.group(1)), tuple(parse_cert(m.group(2))), name)
        if kind == "conj":
            m = re.fullmatch(r"([A-Za-z_][A-Za-z_0-9]*)\s+by\s+H", body)
            if not m:
                raise ScriptSyntaxError("conj step must read 'conj <id> by H'")
            return Conj(m.group(1), name)
        if kind == "weil":
            m = re.fullmatch(r"gamma\s*=\s*(\[[^\]]*\])\s+eps\s*=\s*(\[[^\]]*\])\s+from\s*=\s*(\w+)", body)
            if not m:
                raise ScriptSyntaxError("weil step needs gamma=, eps= and from=")
            return Weil(parse_matrix(m.group(1)), parse_matrix(m.group(2)), m.group(3), name)
        raise ScriptSyntaxError(f"unknown step kind {kind!r}")
    if head == "assert":
        kind, _, body = rest.partition(" ")
        if kind != "gen":
            raise ScriptSyntaxError(f"unknown assertion {kind!r}")
        return AssertGen(parse_matrix(body))
    raise ScriptSyntaxError(f"unknown directive {head!r}")


def _suffix(name):
    return f" as {name}" if name else ""


def format_cert(cert) -> str:
    out = []
    for i, (rid, mult) in enumerate(cert):
        text = f"{rid}*({format_elem(mult)})"
        out.append(text if i == 0 else f"+ {text}")
    return " ".join(out)


def format_step(step) -> str:
    if isinstance(step, Hyp):
        if step.kind == "T":
            body = f"T {step.arg}"
        elif step.kind == "Uq":
            body = f"Uq {step.arg} {step.mode}"
        elif step.kind == "G":
            body = f"G {format_matrix(step.matrix)}"
        else:
            body = step.kind
        return f"hyp {body}{_suffix(step.name)}"
    if isinstance(step, Exact):
        return f"step exact {format_elem(step.lhs)} == {format_elem(step.rhs)}{_suffix(step.name)}"
    if isinstance(step, Combine):
        return (f"step combine target={format_elem(step.target)} "
                f"cert= {format_cert(step.cert)}{_suffix(step.name)}")
    if isinstance(step, Conj):
        return f"step conj {step.source} by H{_suffix(step.name)}"
    if isinstance(step, Weil):
        return (f"step weil gamma={format_matrix(step.gamma)} eps={format_matrix(step.eps)} "
                f"from={step.source}{_suffix(step.name)}")
    if isinstance(step, AssertGen):
        return f"assert gen {format_matrix(step.matrix)}"
    raise TypeError(step)


def format_script(script: DerivationScript) -> str:
    lines = []
    if script.title:
        lines.extend(f"# {t}" for t in script.title.splitlines())
    lines.append(f"session N={script.N}")
    lines.extend(format_step(s) for s in script.steps)
    return "\n".join(lines) + "\n"


# --- reports --------------------------------------------------------------

@dataclass
class Report:
    level: int
    assertions: list
    steps: int
    assumptions: list
    residuals: list
    relations: int
    seconds: float = 0.0
    ok: bool = True
    error: str | None = None
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "ok": self.ok,
            "assertions": self.assertions,
            "steps": self.steps,
            "relations": self.relations,
            "assumptions": self.assumptions,
            "residuals": self.residuals,
            "error": self.error,
            "seconds": round(self.seconds, 4),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"level {self.level}: {'VERIFIED' if self.ok else 'FAILED'}"]
        lines.append(f"  steps: {self.steps}, relations: {self.relations}")
        for a in self.assertions:
            lines.append(f"  gen {a} == 1")
        for a in self.assumptions:
            lines.append(f"  assumes: {a}")
        nonzero = [r for r in self.residuals if r["terms"]]
        lines.append(f"  nonzero residuals: {len(nonzero)}")
        if self.error:
            lines.append(f"  error: {self.error}")
        return "\n".join(lines)


def run_script(script: DerivationScript, trace: bool = False) -> tuple[Report, RelationStore]:
    """Replay ``script``; raises on the first failing step (fail fast)."""
    t0 = time.perf_counter()
    store = RelationStore(script.N)
    store.trace = trace
    for i, step in enumerate(script.steps):
        try:
            store.apply_step(step)
        except ProofError as e:
            if script.lines:
                e.line = script.lines[i]
            raise
    report = Report(
        level=script.N,
        assertions=[format_matrix(m) for m in store.assertions],
        steps=store.steps,
        assumptions=sorted(store.assumptions),
        residuals=store.residuals,
        relations=len(store),
        seconds=time.perf_counter() - t0,
        trace=list(store.log) if trace else [],
    )
    return report, store
