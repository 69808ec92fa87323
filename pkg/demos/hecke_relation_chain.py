"""Build one instance of the Hecke relation H_N R_n H_{n^2 N} = R_n.

For n = 4 at level 15 the derivation runs the T_2-power recursion up to
lambda = 2 before conjugating by H.  The script is generated, printed and
replayed from its text, and the final relation is flattened all the way
back to the hypotheses.

Run:  python demos/hecke_relation_chain.py
"""

from heckeconv.builder import gen_corollary2_script, gen_theorem2_script
from heckeconv.proofs import format_script, parse_script, run_script

script = gen_theorem2_script(4, 15)
text = format_script(script)
print(text)

report, store = run_script(parse_script(text))
print(report.to_text())

flat = store.flatten("Th2_4")
print("\nTh2_4 as a right-ideal combination:")
for base, mult in flat.items():
    print(f"  {base:<3} * ({len(mult)} terms)")
print("audit residual is zero:", store.audit("Th2_4").is_zero())

# Summing over the right residues turns the same relation into the
# residue-sum shape used in the level proofs.
store = run_script(gen_corollary2_script(5, 14))[1]
print("\nm=5, N=14:")
print(" ", store["C2_5"].element)
