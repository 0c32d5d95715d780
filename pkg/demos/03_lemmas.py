"""The three lemma tiers for one abstracted bvand application."""

from intblast import parse_term, translate_formula
from intblast.lemmas import base_lemmas, full_expansion, instance_lemma
from intblast.terms import bv_sort, to_smtlib

decls = [("x", bv_sort(3)), ("y", bv_sort(3))]
_, tm = translate_formula(parse_term("(= (bvand x y) #b101)", dict(decls)), decls)
(app,) = tm.app_index

print("base lemmas:")
for lemma in base_lemmas(app):
    print("  ", to_smtlib(lemma.formula))

print("instance at (6, 5):")
print("  ", to_smtlib(instance_lemma(app, 6, 5).formula))

print("full expansion:")
print("  ", to_smtlib(full_expansion(app).formula))
