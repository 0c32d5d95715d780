import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intblast.corpus import random_formula
from intblast.frontend import parse_term
from intblast.oracle import check_equiv, evaluate
from intblast.preprocess import count_core_ops, eliminate_derived_ops, non_core_ops
from intblast.terms import BOOL, bv, bv_sort, to_smtlib, var


def elim(text, width=4):
    s = bv_sort(width)
    return eliminate_derived_ops(parse_term(text, {"x": s, "a": s, "b": s, "y": s}))


def test_or_with_zero():
    t = elim("(bvor x #x0)")
    assert to_smtlib(t) == "(bvnot (bvand (bvnot x) #b1111))"
    assert check_equiv(t, var("x", bv_sort(4)))


@pytest.mark.parametrize("width", [1, 2, 3, 4])
def test_xor_self_is_zero(width):
    assert check_equiv(elim("(bvxor a a)", width), bv(0, width))


def test_ashr_sign_bit():
    assert evaluate(elim("(bvashr #x8 #x1)"), {}) == 12


@pytest.mark.parametrize("text", [
    "(bvor a b)", "(bvxor a b)", "(bvnand a b)", "(bvnor a b)", "(bvxnor a b)",
    "(bvashr a b)", "(bvsdiv a b)", "(bvsrem a b)", "(bvsmod a b)",
    "((_ rotate_left 3) a)", "((_ rotate_right 1) a)", "((_ repeat 3) a)",
    "(bvugt a b)", "(bvsge a b)", "(distinct a b x)", "(= (bvcomp a b) #b1)",
])
def test_result_is_core(text):
    assert non_core_ops(elim(text, 3)) == set()


def test_keeps_core_terms():
    t = parse_term("(bvult (bvadd x y) (bvand x y))", {"x": bv_sort(4), "y": bv_sort(4)})
    assert eliminate_derived_ops(t) == t


@pytest.mark.parametrize("text,expected", [
    ("(bvnot (bvand x y))", {"bvnot": 1, "bvand": 1}),
    ("#b101", {}),
    ("(ite p x x)", {"ite": 1}),
    ("(bvadd (bvadd x x) (bvadd x x))", {"bvadd": 3}),
])
def test_count_core_ops(text, expected):
    t = parse_term(text, {"x": bv_sort(4), "y": bv_sort(4), "p": BOOL})
    assert count_core_ops(t) == expected


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3))
def test_random_formulas(seed, num_vars, depth):
    _, phi = random_formula(seed, num_vars, depth, widths=(1, 2, 3))
    out = eliminate_derived_ops(phi)
    assert non_core_ops(out) == set()
    assert eliminate_derived_ops(out) == out
    assert check_equiv(phi, out)
