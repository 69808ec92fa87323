"""Generation certificates for Gamma0(N).

Matrices are written as words in S and T by Euclidean reduction, and the
index of the subgroup they generate in PSL2(Z) = <S, T | S^2, (ST)^3> is
found by Todd-Coxeter coset enumeration (HLT strategy with a coset cap).
The subgroup is Gamma0(N) exactly when it is contained in Gamma0(N) and has
index psi(N).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .linalg import IDENTITY, ProjMat, canonicalize, eval_matrix_expr, format_matrix, in_gamma0, mul

S_MAT = canonicalize(0, -1, 1, 0)
T_MAT = canonicalize(1, 1, 0, 1)
T_INV = canonicalize(1, -1, 0, 1)
LETTERS = {"S": S_MAT, "T": T_MAT, "t": T_INV}
_INVERSE_LETTER = {"S": "S", "T": "t", "t": "T"}


class NotUnimodular(ValueError):
    pass


class CosetLimitExceeded(RuntimeError):
    pass


class MemberNotInGamma0(ValueError):
    def __init__(self, matrix: ProjMat, N: int):
        super().__init__(f"{format_matrix(matrix)} is not in Gamma0({N})")
        self.matrix = matrix


# --- words ------------------------------------------------------------------------

def free_reduce(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if out and _INVERSE_LETTER[ch] == out[-1]:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def eval_word(word: str) -> ProjMat:
    m = IDENTITY
    for ch in word:
        m = mul(m, LETTERS[ch])
    return m


def invert_word(word: str) -> str:
    return "".join(_INVERSE_LETTER[ch] for ch in reversed(word))


def word_decompose(x: ProjMat) -> str:
    """Word in S, T, t (t = T^-1) evaluating to the class of ``x``.

    Left-multiply by T^-q (q nearest a/c) and S until the lower-left entry
    vanishes; lengths are O(log max |entry|).
    """
    if x.det != 1:
        raise NotUnimodular(f"{format_matrix(x)} has determinant {x.det}")
    a, b, c, d = x.entries()
    applied: list[str] = []  # letters multiplied on the left, in order
    while c:
        q = (2 * a + c) // (2 * c) if c > 0 else (-2 * a - c) // (-2 * c)
        # T^-q: [[a - qc, b - qd], [c, d]]
        a, b = a - q * c, b - q * d
        applied.append(("t" if q > 0 else "T") * abs(q))
        # S: [[-c, -d], [a, b]]
        a, b, c, d = -c, -d, a, b
        applied.append("S")
    # now +-[[1, k], [0, 1]] with a = d = +-1
    k = b * a
    tail = ("T" if k > 0 else "t") * abs(k)
    word = "".join(invert_word(w) for w in applied) + tail
    return free_reduce(word)


# --- index ------------------------------------------------------------------------

def psi_index(N: int) -> int:
    """|P^1(Z/N)|, counted directly.

    Units act freely on pairs (c, d) with gcd(c, d, N) = 1, so the number of
    classes is the number of such pairs divided by the number of units.
    """
    if N < 1:
        raise ValueError("N must be positive")
    units = sum(1 for u in range(N) if gcd(u, N) == 1)
    pairs = sum(1 for c in range(N) for d in range(N) if gcd(gcd(c, d), N) == 1)
    return pairs // units


# --- coset enumeration ------------------------------------------------------------

# columns: S (an involution), T, t
_COL = {"S": 0, "T": 1, "t": 2}
_INV_COL = (0, 2, 1)
RELATORS = ("SS", "STSTST")


@dataclass
class CosetTable:
    rows: list[tuple[int, int, int]]
    status: str
    index: int
    defined: int = 0

    def act(self, coset: int, word: str) -> int:
        for ch in word:
            coset = self.rows[coset][_COL[ch]]
        return coset


class _Enumerator:
    def __init__(self, max_cosets: int):
        self.table: list[list[int | None]] = [[None, None, None]]
        self.parent = [0]
        self.live = 1
        self.max = max_cosets

    def rep(self, c: int) -> int:
        root = c
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[c] != root:
            self.parent[c], c = root, self.parent[c]
        return root

    def alive(self, c: int) -> bool:
        return self.parent[c] == c

    def define(self, c: int, x: int) -> None:
        if self.live >= self.max:
            raise CosetLimitExceeded(f"more than {self.max} cosets")
        n = len(self.table)
        self.table.append([None, None, None])
        self.parent.append(n)
        self.live += 1
        self.table[c][x] = n
        self.table[n][_INV_COL[x]] = c

    def _merge(self, k: int, l: int, queue: list[int]) -> None:
        k, l = self.rep(k), self.rep(l)
        if k == l:
            return
        if k > l:
            k, l = l, k
        self.parent[l] = k
        self.live -= 1
        queue.append(l)

    def coincidence(self, a: int, b: int) -> None:
        queue: list[int] = []
        self._merge(a, b, queue)
        i = 0
        while i < len(queue):
            e = queue[i]
            i += 1
            for x in range(3):
                f = self.table[e][x]
                if f is None:
                    continue
                xi = _INV_COL[x]
                if self.table[f][xi] == e:
                    self.table[f][xi] = None
                e1, f1 = self.rep(e), self.rep(f)
                if self.table[e1][x] is not None:
                    self._merge(f1, self.table[e1][x], queue)
                elif self.table[f1][xi] is not None:
                    self._merge(e1, self.table[f1][xi], queue)
                else:
                    self.table[e1][x] = f1
                    self.table[f1][xi] = e1

    def scan_and_fill(self, c: int, word: list[int]) -> None:
        t = self.table
        f, b = c, c
        i, j = 0, len(word) - 1
        while True:
            while i <= j and t[f][word[i]] is not None:
                f = t[f][word[i]]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and t[b][_INV_COL[word[j]]] is not None:
                b = t[b][_INV_COL[word[j]]]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                t[f][word[i]] = b
                t[b][_INV_COL[word[i]]] = f
                return
            self.define(f, word[i])


def todd_coxeter(subgroup_words: list[str], max_cosets: int = 10_000) -> CosetTable:
    """Enumerate cosets of <words> in <S, T | S^2, (ST)^3>."""
    en = _Enumerator(max_cosets)
    rels = [[_COL[ch] for ch in r] for r in RELATORS]
    for w in subgroup_words:
        w = free_reduce(w)
        if w:
            en.scan_and_fill(0, [_COL[ch] for ch in w])
    c = 0
    while c < len(en.table):
        for r in rels:
            if not en.alive(c):
                break
            en.scan_and_fill(c, r)
        if en.alive(c):
            for x in range(3):
                if en.table[c][x] is None:
                    en.define(c, x)
        c += 1
    live = [k for k in range(len(en.table)) if en.alive(k)]
    number = {k: i for i, k in enumerate(live)}
    rows = [tuple(number[en.rep(en.table[k][x])] for x in range(3)) for k in live]
    return CosetTable(rows, "complete", len(rows), len(en.table))


# --- certification ----------------------------------------------------------------

@dataclass
class GenerationCertificate:
    level: int
    expressions: list[str]
    matrices: list[ProjMat]
    members: list[bool]
    words: list[str]
    index: int | None
    psi: int
    verdict: str
    note: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def generates(self) -> bool:
        return self.verdict == "Generates"

    def to_dict(self) -> dict:
        return {"level": self.level, "expressions": self.expressions,
                "matrices": [format_matrix(m) for m in self.matrices],
                "members": self.members, "words": self.words, "index": self.index,
                "psi": self.psi, "verdict": self.verdict, "note": self.note}

    def to_text(self) -> str:
        lines = [f"level {self.level}: {self.verdict} (index {self.index}, psi {self.psi})"]
        for e, m, w in zip(self.expressions, self.matrices, self.words):
            lines.append(f"  {e:<22} {format_matrix(m):<18} {w or '1'}")
        if self.note:
            lines.append(f"  note: {self.note}")
        return "\n".join(lines)


def certify_generators(N: int, exprs: list, max_cosets: int | None = None) -> GenerationCertificate:
    """Decide whether the listed matrices generate Gamma0(N)."""
    psi = psi_index(N)
    cap = max_cosets if max_cosets is not None else 10 * psi + 100
    names, mats = [], []
    for e in exprs:
        if isinstance(e, ProjMat):
            names.append(format_matrix(e))
            mats.append(e)
        else:
            names.append(str(e))
            mats.append(eval_matrix_expr(str(e), N))
    members = [in_gamma0(m, N) for m in mats]
    for m, ok in zip(mats, members):
        if not ok:
            raise MemberNotInGamma0(m, N)
    words = [word_decompose(m) for m in mats]
    try:
        table = todd_coxeter(words, cap)
    except CosetLimitExceeded as e:
        return GenerationCertificate(N, names, mats, members, words, None, psi, "NotGenerating",
                                     f"coset limit {cap} reached ({e})")
    verdict = "Generates" if table.index == psi else "NotGenerating"
    note = "" if verdict == "Generates" else f"subgroup has index {table.index}"
    return GenerationCertificate(N, names, mats, members, words, table.index, psi, verdict, note)
