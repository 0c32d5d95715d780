"""From bit-vectors to integers: preprocessing, translation, ranges."""

from intblast import count_core_ops, eliminate_derived_ops, parse_term, translate_formula
from intblast.terms import bv_sort, to_smtlib

decls = [("x", bv_sort(4)), ("y", bv_sort(4))]
phi = parse_term("(= (bvor (bvshl x #x1) y) (bvxor x y))", dict(decls))
print("input:       ", to_smtlib(phi))

core = eliminate_derived_ops(phi)
print("core ops:    ", to_smtlib(core))
print("census:      ", count_core_ops(core))

phi_int, tm = translate_formula(core, decls)
print("integer form:", to_smtlib(phi_int))
print("variables:   ", tm.var_map)
print("functions:   ", tm.uf_registry)
for r in tm.range_constraints:
    print("  range", to_smtlib(r))
