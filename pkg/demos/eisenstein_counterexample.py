"""Why the cusp argument needs cuspidality, on a concrete example.

L(s, chi3) L(s-1, chi3) comes from a weight 2 Eisenstein series on
Gamma0(9).  It is invariant under the whole group, yet its constant term at
the cusp 1/3 is not zero.  The level 11 cusp form, by contrast, vanishes at
every cusp we probe.

Run:  python demos/eisenstein_counterexample.py
"""

from heckeconv import builder
from heckeconv.analytic import check_invariance, cusp_constant_term, eisenstein_chi3, f11
from heckeconv.builder import InvalidLevelShape, gen_theorem3_script
from heckeconv.cusps import CuspSpec
from heckeconv.linalg import eval_matrix_expr

E = eisenstein_chi3(1000)
print("first coefficients:", [E[n] for n in range(1, 11)])

print("\ninvariance under the Gamma0(9) generators:")
for expr in builder.GENERATORS[9]:
    rep = check_invariance(E, eval_matrix_expr(expr, 9), tol=1e-6)
    print(f"  {expr:<5} residual {rep.max_residual:.1e}  {'ok' if rep.passed else 'FAIL'}")

print("\nconstant terms:")
for cusp in (CuspSpec.infinity(9), CuspSpec.zero(9), CuspSpec.one_over(9, 3)):
    rep = cusp_constant_term(E, cusp)
    print(f"  cusp {cusp.label:<4} width {cusp.width}: a0 = {rep.estimate:.6f}")

# 9 = 3^2 is not of the shape 2^e * (odd squarefree) that the symbolic
# cusp argument handles, and the numbers above show the conclusion fails.
try:
    gen_theorem3_script(9, 3)
except InvalidLevelShape as e:
    print(f"\nsymbolic route at N=9: {e}")

f = f11(1000)
print("\nfor comparison, eta(z)^2 eta(11z)^2:")
for cusp in (CuspSpec.infinity(11), CuspSpec.zero(11)):
    print(f"  cusp {cusp.label:<4} |a0| = {abs(cusp_constant_term(f, cusp).estimate):.1e}")
