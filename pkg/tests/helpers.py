from math import gcd

from heckeconv.linalg import canonicalize


def sample_gamma0(N, count, rng, bound=40):
    """``count`` random elements of Gamma0(N) with det 1."""
    out = []
    while len(out) < count:
        c, d = rng.randint(-bound, bound), rng.randint(-2 * bound, 2 * bound)
        if d == 0 or gcd(c * N, d) != 1:
            continue
        if c == 0:
            if abs(d) != 1:
                continue
            a, b = d, rng.randint(-bound, bound)
        else:
            a = pow(d, -1, abs(c * N)) + abs(c * N) * rng.randint(-3, 3)
            b = (a * d - 1) // (c * N)
        out.append(canonicalize(a, b, c * N, d))
    return out


ACCEPTANCE_LINES: list[str] = []


class criterion:
    """Context manager printing one PASS/FAIL line for an acceptance criterion."""

    def __init__(self, number, title):
        self.number, self.title = number, title
        self.details: list[str] = []

    def note(self, text):
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        status = "PASS" if kind is None else "FAIL"
        extra = "; ".join(self.details)
        if exc is not None:
            extra = (extra + "; " if extra else "") + f"{kind.__name__}: {exc}"
        line = f"AC{self.number} {status} {self.title}" + (f" ({extra})" if extra else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return False
