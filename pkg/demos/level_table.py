"""One line per level: proof size, replay time and the generation check.

Run:  python demos/level_table.py
"""

import time

from heckeconv import builder
from heckeconv.proofs import parse_script, run_script
from heckeconv.subgroups import certify_generators

print(f"{'N':>3} {'gens':>4} {'steps':>5} {'rels':>5} {'replay':>8} {'index':>5} {'psi':>4}  assumptions")
for N in builder.LEVELS:
    t0 = time.perf_counter()
    report, _ = run_script(parse_script(builder.builtin_script_text(N)))
    dt = time.perf_counter() - t0
    cert = certify_generators(N, list(builder.GENERATORS[N]))
    extra = [a.split(" (")[0] for a in report.assumptions if not a.startswith("k even")]
    print(f"{N:>3} {len(report.assertions):>4} {report.steps:>5} {report.relations:>5} "
          f"{dt * 1000:>6.1f}ms {cert.index:>5} {cert.psi:>4}  {'; '.join(extra) or '-'}")
