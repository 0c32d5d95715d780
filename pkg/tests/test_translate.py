import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intblast.corpus import random_formula
from intblast.frontend import parse_term
from intblast.oracle import Evaluator, evaluate, true_bv_function
from intblast.preprocess import eliminate_derived_ops
from intblast.terms import BOOL, INT, apply, bv_sort, make, num, subterms, to_smtlib, var
from intblast.translate import (
    RangeError, TranslationMap, to_bv, translate_formula, translate_term,
)

S4 = bv_sort(4)


def funcs_for(tm):
    return {name: true_bv_function(op, k) for (op, k), name in tm.uf_registry.items()}


def test_comparison():
    phi = parse_term("(bvult x y)", {"x": S4, "y": S4})
    out, tm = translate_formula(phi, [("x", S4), ("y", S4)])
    x, y = var("x!0", INT), var("y!1", INT)
    assert out == make("<", [x, y])
    assert to_smtlib(tm.range_constraints[0]) == "(and (<= 0 x!0) (<= x!0 15))"
    assert len(tm.range_constraints) == 2 and tm.app_index == []


def test_and_becomes_uf():
    s = bv_sort(2)
    phi = parse_term("(= (bvand x y) x)", {"x": s, "y": s})
    out, tm = translate_formula(phi, [("x", s), ("y", s)])
    x, y = var("x!0", INT), var("y!1", INT)
    app = apply("bvand_2", (x, y))
    assert out == make("=", [app, x])
    assert tm.uf_registry == {("and", 2): "bvand_2"}
    assert to_smtlib(tm.range_constraints[-1]) == "(and (<= 0 (bvand_2 x!0 y!1)) (<= (bvand_2 x!0 y!1) 3))"


def test_add_literal():
    phi = parse_term("(= (bvadd x #x9) #x2)", {"x": S4})
    out, tm = translate_formula(phi, [("x", S4)])
    assert to_smtlib(out) == "(= (mod (+ x!0 9) 16) 2)"
    sols = [v for v in range(16) if evaluate(out, {"x!0": v})]
    assert sols == [9]


@pytest.mark.parametrize("text,expected", [
    ("(bvnot #x5)", 10),
    ("((_ extract 2 1) #b110)", 3),
    ("(bvudiv x #x0)", 15),
])
def test_rule_values(text, expected):
    out = translate_term(parse_term(text, {"x": S4}), TranslationMap())
    assert all(evaluate(out, {"x!0": x}) == expected for x in range(16))


def test_signed_comparison():
    out = translate_term(parse_term("(bvslt #x8 #x7)"), TranslationMap())
    assert evaluate(out, {}) is True


def test_to_bv():
    assert to_smtlib(to_bv(5, 4)) == "#b0101"
    assert to_smtlib(to_bv(0, 1)) == "#b0"
    with pytest.raises(RangeError):
        to_bv(16, 4)
    with pytest.raises(RangeError):
        to_bv(-1, 4)


def test_shared_applications():
    phi = parse_term("(and (= (bvand x y) x) (bvult (bvand x y) (bvshl x y)) (= (bvand y x) y))",
                     {"x": S4, "y": S4})
    _, tm = translate_formula(phi, [("x", S4), ("y", S4)])
    assert [a.op for a in tm.app_index] == ["and", "shl", "and"]
    assert len(tm.range_constraints) == 2 + 3
    assert sorted(tm.uf_registry.values()) == ["bvand_4", "bvshl_4"]


def test_rejects_non_core():
    with pytest.raises(ValueError):
        translate_term(parse_term("(bvor x x)", {"x": S4}), TranslationMap())


def test_declaration_order_and_bools():
    phi = parse_term("(and p (= y y))", {"p": BOOL, "y": S4})
    out, tm = translate_formula(phi, [("y", S4), ("q", bv_sort(2)), ("p", BOOL)])
    assert tm.var_map == {"y": ("y!0", 4), "q": ("q!1", 2), "p": ("p!2", 0)}
    assert tm.declarations() == [("y!0", INT), ("q!1", INT), ("p!2", BOOL)]
    assert out.args[0] == var("p!2", BOOL)


def test_deterministic():
    decls, phi = random_formula(7, 3, 4)
    phi = eliminate_derived_ops(phi)
    a, tma = translate_formula(phi, decls)
    b, tmb = translate_formula(phi, decls)
    assert a == b and tma.range_constraints == tmb.range_constraints
    assert [x.app_term for x in tma.app_index] == [x.app_term for x in tmb.app_index]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 4))
def test_random_homomorphism(seed, num_vars, depth):
    decls, phi = random_formula(seed, num_vars, depth, widths=(1, 2, 3), bool_vars=1)
    core = eliminate_derived_ops(phi)
    out, tm = translate_formula(core, decls)
    # every abstracted occurrence has an app entry
    origins = {s for s in subterms(core) if s.op in ("bvand", "bvshl", "bvlshr")}
    assert {a.origin for a in tm.app_index} == origins
    ev_bv, ev_int = Evaluator(phi), Evaluator(out)
    ranges = [Evaluator(r) for r in tm.range_constraints]
    funcs = funcs_for(tm)
    rng = random.Random(seed)
    for _ in range(20):
        env = {n: (rng.random() < 0.5 if s == BOOL else rng.randrange(1 << s.width))
               for n, s in decls}
        ienv = {tm.var_map[n][0]: v for n, v in env.items()}
        assert ev_int(ienv, funcs) == ev_bv(env)
        assert all(r(ienv, funcs) for r in ranges)
