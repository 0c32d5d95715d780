"""Solve with an external solver; compare with and without the bit-vector check.

Needs a solver speaking SMT-LIB 2 on stdin, e.g. ``pip install z3-solver``.
"""

import shutil
import sys

from intblast import Config, parse_script, solve

z3 = shutil.which("z3")
if z3 is None:
    sys.exit("no z3 on PATH; set up a solver first")
solver = [z3, "-in", "-smt2"]

script = parse_script("""
(declare-const x (_ BitVec 8))
(declare-const z (_ BitVec 8))
(assert (= (bvand x #x0f) #x0a))
(assert (= (bvmul z #x03) #x0f))
""")

for underapprox in (False, True):
    cfg = Config(nia_solver=solver, bv_solver=solver, underapprox_enabled=underapprox)
    r = solve(script, cfg)
    print(f"under-approximation {'on ' if underapprox else 'off'}:", r.verdict,
          r.assignment(), r.stats.to_json())

unsat = parse_script("""
(declare-const x (_ BitVec 4))
(assert (= (bvand x x) (bvadd x #x1)))
""")
r = solve(unsat, Config(nia_solver=solver, underapprox_enabled=False))
print("idempotence contradiction:", r.verdict, r.stats.lemmas)
