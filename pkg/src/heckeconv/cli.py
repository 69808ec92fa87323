"""Command-line front end.

Exit codes: 0 success, 1 a check failed (not generating, residual above
tolerance, nonvanishing constant term), 2 certificate mismatch, 3 parse
error or unsupported level, 4 precision unreachable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

EXIT_OK, EXIT_FAIL, EXIT_CERT, EXIT_PARSE, EXIT_PRECISION = 0, 1, 2, 3, 4

DEFAULTS = {"K": 1000, "tol": 1e-8, "cusp_tol": 1e-6, "max_cosets": None}


class UsageError(Exception):
    pass


def load_config(path: str | None) -> dict:
    cfg = dict(DEFAULTS)
    if not path:
        return cfg
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        key = {"k": "K", "terms": "K", "coset_cap": "max_cosets"}.get(key, key)
        if not sep or key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: expected one of {sorted(DEFAULTS)} = value")
        cfg[key] = int(value) if key in ("K", "max_cosets") else float(value)
    return cfg


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(text)


def _cplx(z: complex) -> list[float]:
    return [z.real, z.imag]


# --- verify ------------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .builder import LEVELS, UnsupportedLevel, builtin_script_text
    from .proofs import parse_script, run_script

    if args.script:
        sources = [(args.script, Path(args.script).read_text(encoding="utf-8"))]
    else:
        levels = [args.level] if args.level is not None else list(LEVELS)
        for N in levels:
            if N not in LEVELS:
                raise UnsupportedLevel(f"unsupported level {N}")
        sources = [(f"level {N}", builtin_script_text(N)) for N in levels]
    # replay raises on the first failing step; main() maps the error to an exit code
    reports = []
    for label, text in sources:
        report, _ = run_script(parse_script(text), trace=args.trace)
        reports.append(report)
    ok = all(r.ok for r in reports)
    payload = {"command": "verify", "results": [r.to_dict() for r in reports], "ok": ok}
    if args.trace:
        for d, r in zip(payload["results"], reports):
            d["trace"] = r.trace
    blocks = []
    for r in reports:
        blocks.append(r.to_text() + ("".join(f"\n    {t}" for t in r.trace) if args.trace else ""))
    _emit(args, payload, "\n\n".join(blocks))
    return EXIT_OK if ok else EXIT_FAIL


# --- certify-generators ------------------------------------------------------------

def cmd_certify(args, cfg) -> int:
    from .builder import GENERATORS, LEVELS

    levels = [args.level] if args.level is not None else list(LEVELS)
    certs = []
    for N in levels:
        if args.gens:
            exprs = list(args.gens)
        elif N in GENERATORS:
            exprs = list(GENERATORS[N])
        else:
            raise UsageError(f"unsupported level {N} (give --gens)")
        for name in args.drop or []:
            matches = [e for e in exprs if e.replace(" ", "") == name.replace(" ", "")
                       or e.replace("(", "").replace(")", "") == name]
            if not matches:
                raise UsageError(f"--drop {name}: not in the level {N} list {exprs}")
            exprs.remove(matches[0])
        from .subgroups import certify_generators
        certs.append(certify_generators(N, exprs, cfg["max_cosets"]))
    ok = all(c.generates for c in certs)
    payload = {"command": "certify-generators", "results": [c.to_dict() for c in certs], "ok": ok}
    _emit(args, payload, "\n".join(c.to_text() for c in certs))
    return EXIT_OK if ok else EXIT_FAIL


# --- numeric -----------------------------------------------------------------------

def _form(args, cfg):
    from .analytic import parse_form
    if not args.form:
        raise UsageError("--form is required")
    return parse_form(args.form, args.terms or cfg["K"])


def _level_matrices(N: int):
    from .builder import GENERATORS, generator_matrices
    from .linalg import canonicalize
    if N == 1:
        return ["T", "S"], [canonicalize(1, 1, 0, 1), canonicalize(0, -1, 1, 0)]
    if N not in GENERATORS:
        raise UsageError(f"no generator list for level {N}; give --matrix")
    return list(GENERATORS[N]), generator_matrices(N)


def _extra_points(g, seed: int, count: int = 3):
    import numpy as np
    from .analytic import MIN_IMAG, _act
    rng = np.random.default_rng(seed)
    out = []
    base = -g.d / g.c if g.c else 0.0
    for _ in range(200):
        if len(out) == count:
            break
        y = (1 / abs(g.c)) * rng.uniform(0.9, 1.1) if g.c else rng.uniform(0.3, 1.5)
        z = complex(base + rng.uniform(-0.01, 0.01) if g.c else rng.uniform(-0.5, 0.5), y)
        if z.imag >= MIN_IMAG and _act(g, z).imag >= MIN_IMAG:
            out.append(z)
    return out


def cmd_numeric(args, cfg) -> int:
    from .linalg import classify_order, eval_matrix_expr, format_matrix, parse_matrix

    tol = args.tol if args.tol is not None else cfg["tol"]
    sub = args.numeric_cmd
    if sub == "classify":
        if not args.matrix:
            raise UsageError("--matrix is required")
        m = parse_matrix(args.matrix[0]) if args.matrix[0].startswith("[") else \
            eval_matrix_expr(args.matrix[0], args.level or 1)
        cls = classify_order(m)
        payload = {"command": "numeric classify", "matrix": format_matrix(m), "kind": cls.kind,
                   "discriminant": str(cls.discriminant), "order": cls.order, "text": str(cls)}
        _emit(args, payload, str(cls))
        return EXIT_OK

    f = _form(args, cfg)
    if sub == "expand":
        show = min(args.show, f.K)
        if args.export:
            Path(args.export).write_text(f.to_json() + "\n", encoding="utf-8")
        coeffs = [str(c) for c in f.coeffs[1:show + 1]]
        payload = {"command": "numeric expand", "form": f.name, "level": f.level,
                   "weight": f.weight, "K": f.K, "coefficients": coeffs}
        text = f"{f.name} (weight {f.weight}, level {f.level}, K={f.K})\n" + "\n".join(
            f"a_{n} = {c}" for n, c in enumerate(coeffs, 1))
        _emit(args, payload, text)
        return EXIT_OK

    if sub == "invariance":
        from .analytic import check_invariance, sample_points
        N = args.level if args.level is not None else f.level
        if args.matrix:
            names = list(args.matrix)
            mats = [parse_matrix(e) if e.startswith("[") else eval_matrix_expr(e, N) for e in names]
        else:
            names, mats = _level_matrices(N)
        rows = []
        for name, g in zip(names, mats):
            pts = sample_points(g)
            if args.seed is not None:
                pts += _extra_points(g, args.seed)
            r = check_invariance(f, g, pts, tol)
            rows.append({"name": name, "matrix": format_matrix(g), "max_residual": r.max_residual,
                         "tail_bound": r.tail, "points": [_cplx(z) for z in r.points],
                         "pass": r.passed})
        ok = all(r["pass"] for r in rows)
        payload = {"command": "numeric invariance", "form": f.name, "level": N, "K": f.K,
                   "tol": tol, "results": rows, "ok": ok}
        text = "\n".join(f"{r['name']:<20} {r['matrix']:<18} residual {r['max_residual']:.3e} "
                         f"{'PASS' if r['pass'] else 'FAIL'}" for r in rows)
        _emit(args, payload, text)
        return EXIT_OK if ok else EXIT_FAIL

    if sub == "hecke":
        from .analytic import hecke_eigen_check
        primes = args.p or [2, 3]
        rows = []
        for p in primes:
            h = hecke_eigen_check(f, p, tol)
            rows.append({"p": p, "estimate": _cplx(h.estimate),
                         "expected": None if h.expected is None else str(h.expected),
                         "residual": h.residual, "pass": h.passed})
        ok = all(r["pass"] for r in rows)
        payload = {"command": "numeric hecke", "form": f.name, "tol": tol, "results": rows, "ok": ok}
        text = "\n".join(f"p={r['p']}: eigenvalue {r['estimate'][0]:.12g} expected {r['expected']} "
                         f"residual {r['residual']:.3e} {'PASS' if r['pass'] else 'FAIL'}" for r in rows)
        _emit(args, payload, text)
        return EXIT_OK if ok else EXIT_FAIL

    if sub == "cusp":
        from .analytic import CuspSpec, cusp_constant_term
        N = args.level if args.level is not None else f.level
        cusp_tol = args.tol if args.tol is not None else cfg["cusp_tol"]
        rows = []
        for label in args.cusp or ["oo", "0"]:
            r = cusp_constant_term(f, CuspSpec.parse(label, N), args.y0, tol=cfg["tol"])
            rows.append({"cusp": r.cusp.label, "width": r.cusp.width, "y0": r.y0,
                         "constant_term": _cplx(r.estimate), "modulus": abs(r.estimate),
                         "vanishes": abs(r.estimate) < cusp_tol})
        ok = all(r["vanishes"] for r in rows)
        payload = {"command": "numeric cusp", "form": f.name, "level": N, "tol": cusp_tol,
                   "results": rows, "ok": ok}
        text = "\n".join(f"cusp {r['cusp']:<5} width {r['width']:<3} |a0| = {r['modulus']:.3e} "
                         f"{'vanishes' if r['vanishes'] else 'NONZERO'}" for r in rows)
        _emit(args, payload, text)
        return EXIT_OK if ok else EXIT_FAIL
    raise UsageError(f"unknown numeric command {sub}")


# --- script generation ---------------------------------------------------------------

def cmd_script(args) -> int:
    from . import builder
    from .proofs import format_script, run_script

    kind = args.kind
    if kind == "level":
        if args.level is None:
            raise UsageError("--level is required")
        script = builder.build_level(args.level).script
    elif kind == "theorem2":
        script = builder.gen_theorem2_script(args.n, _need_level(args), args.lam_max)
    elif kind == "corollary2":
        script = builder.gen_corollary2_script(args.m, _need_level(args))
    elif kind == "theorem3":
        script = builder.gen_theorem3_script(_need_level(args), args.r)
    else:
        raise UsageError(f"unknown script kind {kind}")
    text = format_script(script)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    report, _ = run_script(script)
    if args.json:
        print(json.dumps({"command": f"script {kind}", "script": text, "report": report.to_dict()},
                         sort_keys=True, indent=2))
    elif not args.output:
        print(text, end="")
    else:
        print(report.to_text())
    return EXIT_OK if report.ok else EXIT_CERT


def _need_level(args) -> int:
    if args.level is None:
        raise UsageError("--level is required")
    return args.level


# --- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--trace", action="store_true", help="print each certificate residual")
    common.add_argument("--config", help="key=value file setting K, tol, cusp_tol, max_cosets")
    common.add_argument("--level", type=int)

    p = argparse.ArgumentParser(prog="heckeconv",
                                description="Replay and check converse-theorem certificates.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="replay built-in or user scripts")
    v.add_argument("--script", help="path to a .ccv derivation script")

    c = sub.add_parser("certify-generators", parents=[common], help="Todd-Coxeter generation check")
    c.add_argument("--drop", action="append", help="remove a generator from the list (repeatable)")
    c.add_argument("--gens", nargs="+", help="explicit generator expressions")
    c.add_argument("--max-cosets", type=int, dest="max_cosets")

    n = sub.add_parser("numeric", help="numeric checks on q-expansions")
    nsub = n.add_subparsers(dest="numeric_cmd", required=True)
    numeric_common = argparse.ArgumentParser(add_help=False, parents=[common])
    numeric_common.add_argument("--form", help="eta:1^2,11^2 | euler:<file> | eis-chi3 | delta")
    numeric_common.add_argument("--terms", type=int, help="truncation K")
    numeric_common.add_argument("--tol", type=float)
    numeric_common.add_argument("--seed", type=int, help="add seeded random sample points")
    numeric_common.add_argument("--matrix", action="append")
    inv = nsub.add_parser("invariance", parents=[numeric_common])
    inv.set_defaults()
    hk = nsub.add_parser("hecke", parents=[numeric_common])
    hk.add_argument("--p", type=int, action="append")
    cu = nsub.add_parser("cusp", parents=[numeric_common])
    cu.add_argument("--cusp", action="append", help="oo, 0 or 1/r (repeatable)")
    cu.add_argument("--y0", type=float)
    ex = nsub.add_parser("expand", parents=[numeric_common])
    ex.add_argument("--show", type=int, default=20)
    ex.add_argument("--export", help="write coefficients as JSON")
    nsub.add_parser("classify", parents=[numeric_common])

    s = sub.add_parser("script", parents=[common], help="generate derivation scripts")
    s.add_argument("kind", choices=["level", "theorem2", "corollary2", "theorem3"])
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--lam-max", type=int, default=3, dest="lam_max")
    s.add_argument("--output", "-o")
    return p


def main(argv: list[str] | None = None) -> int:
    from .analytic import MissingPrime, NonIntegralLeadingPower, PrecisionUnreachable
    from .builder import BuilderError, UnsupportedLevel
    from .cusps import InvalidCuspData
    from .expr import ExprSyntaxError
    from .linalg import MatrixSyntaxError
    from .proofs import CertificateMismatch, ProofError, ScriptSyntaxError
    from .subgroups import MemberNotInGamma0

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    start = time.perf_counter()
    try:
        cfg = load_config(args.config)
        if getattr(args, "max_cosets", None) is not None:
            cfg["max_cosets"] = args.max_cosets
        if args.command == "verify":
            code = cmd_verify(args)
        elif args.command == "certify-generators":
            code = cmd_certify(args, cfg)
        elif args.command == "numeric":
            code = cmd_numeric(args, cfg)
        else:
            code = cmd_script(args)
    except CertificateMismatch as e:
        print(f"error: certificate mismatch: {e}", file=sys.stderr)
        return EXIT_CERT
    except PrecisionUnreachable as e:
        print(f"error: precision unreachable: {e}", file=sys.stderr)
        return EXIT_PRECISION
    except (MemberNotInGamma0, InvalidCuspData) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (ScriptSyntaxError, ExprSyntaxError, MatrixSyntaxError, UsageError, UnsupportedLevel,
            NonIntegralLeadingPower, MissingPrime, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (BuilderError, ProofError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    if args.trace and not args.json:
        print(f"elapsed {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
