"""Walk through the level 11 argument end to end.

Start from the four facts a Hecke eigenform with a functional equation
gives us (P, H, T_2, T_3 act as scalars), derive M_2 = 1 and M_3 = 1 in the
group ring, confirm that P, M_2, M_3 really generate Gamma0(11), and finally
look at an actual weight 2 form of level 11 to see the invariance numerically.

Run:  python demos/level11_walkthrough.py
"""

from heckeconv import builder
from heckeconv.analytic import check_invariance, f11, hecke_eigen_check
from heckeconv.linalg import classify_order, eval_matrix_expr, parse_matrix
from heckeconv.proofs import parse_script, run_script
from heckeconv.subgroups import certify_generators

N = 11

# The shipped script is plain text; every step carries its own certificate.
text = builder.builtin_script_text(N)
script = parse_script(text)
print(f"script for level {N}: {len(script.steps)} steps")
for line in text.splitlines()[:6]:
    print("   ", line[:100])
print("    ...")

report, store = run_script(script)
print()
print(report.to_text())

# The one non-algebraic move is the elliptic rule.  Its side condition is a
# plain matrix fact we can check on its own.
eps = parse_matrix("[1,-2/3;11/2,-8/3]")
print()
print("elliptic matrix", eps, "->", classify_order(eps))

# Every relation flattens back to the hypotheses with zero residual.
for m in store.assertions:
    rid = store.proves_invariance(m)
    bases = sorted(store.flatten(rid))
    print(f"{str(m):<14} via {rid:<4} rests on {', '.join(bases)}; audit residual "
          f"{'0' if store.audit(rid).is_zero() else 'NONZERO'}")

# Are these three matrices enough?  Coset enumeration answers that.
cert = certify_generators(N, list(builder.GENERATORS[N]))
print()
print(cert.to_text())
short = certify_generators(N, ["P", "M(2)"])
print(f"without M(3): {short.verdict} ({short.note})")

# Numeric sanity check on eta(z)^2 eta(11z)^2.
f = f11(1000)
print()
for expr in builder.GENERATORS[N]:
    rep = check_invariance(f, eval_matrix_expr(expr, N))
    print(f"f|{expr:<5} - f : max residual {rep.max_residual:.1e}")
for p in (2, 3, 5):
    print(f"T_{p} eigenvalue ~ {hecke_eigen_check(f, p).estimate.real:+.10f}")
