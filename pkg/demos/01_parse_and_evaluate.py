"""Parse a small QF_BV script, evaluate it, and brute-force it."""

from intblast import brute_force_sat, evaluate, expand_defines, parse_script

text = """
(set-logic QF_BV)
(declare-const x (_ BitVec 4))
(declare-const y (_ BitVec 4))
(define-fun low ((a (_ BitVec 4))) (_ BitVec 2) ((_ extract 1 0) a))
(assert (= (low (bvadd x y)) #b11))
(assert (bvslt x y))
(check-sat)
"""

script = expand_defines(parse_script(text))
phi = script.formula()
print("formula:", phi)

# signed order: #x8 is -8, so it sits below #x7
print("x=8, y=7:", evaluate(phi, {"x": 8, "y": 7}))
print("x=1, y=2:", evaluate(phi, {"x": 1, "y": 2}))

r = brute_force_sat(phi)
print("oracle:", r.verdict, r.assignment)
