import pytest

from intblast.frontend import parse_term
from intblast.oracle import (
    BudgetExceeded, IncompleteModelError, brute_force_sat, check_equiv, evaluate,
    to_signed, true_bv_function,
)
from intblast.preprocess import eliminate_derived_ops
from intblast.terms import BOOL, INT, apply, bv, bv_sort, make, num, var


def ev(text, decls=None, env=None):
    return evaluate(parse_term(text, decls or {}), env or {})


@pytest.mark.parametrize("text,expected", [
    ("(bvand #xc #xa)", 8),
    ("(bvudiv #x7 #x0)", 15),
    ("(bvurem #x7 #x0)", 7),
    ("(bvsmod #xd #x5)", 2),
    ("(bvsmod #x3 #xb)", 14),
    ("(bvsrem #xd #x5)", 13),
    ("(bvsdiv #xd #x5)", 0),
    ("(bvsdiv #x9 #x0)", 1),
    ("(bvsdiv #x7 #x0)", 15),
    ("(bvashr #x8 #x1)", 12),
    ("(bvshl #x3 #x2)", 12),
    ("(bvlshr #x9 #x4)", 0),
    ("(bvneg #x1)", 15),
    ("(concat #b10 #b01)", 9),
    ("((_ extract 2 1) #b110)", 3),
    ("((_ sign_extend 2) #b10)", 14),
    ("((_ rotate_left 1) #b1001)", 3),
    ("((_ rotate_right 5) #b1001)", 12),
    ("((_ repeat 2) #b10)", 10),
    ("(bvcomp #x3 #x3)", 1),
    ("(bvxnor #x3 #x5)", 9),
])
def test_bv_operators(text, expected):
    assert ev(text) == expected


@pytest.mark.parametrize("text,expected", [
    ("(bvslt #x8 #x7)", True),
    ("(bvsge #x8 #x7)", False),
    ("(bvugt #x8 #x7)", True),
    ("(distinct #x1 #x2 #x1)", False),
    ("(xor true true true)", True),
    ("(=> false false)", True),
])
def test_predicates(text, expected):
    assert ev(text) is expected


def test_bvsmod_against_definition():
    # bvsmod is the remainder whose sign follows the divisor
    for s in range(16):
        for t in range(16):
            ss, ts = to_signed(s, 4), to_signed(t, 4)
            want = s if ts == 0 else (ss - ts * (ss // ts)) % 16
            assert ev(f"(bvsmod (_ bv{s} 4) (_ bv{t} 4))") == want


def test_int_semantics_are_euclidean():
    assert evaluate(make("mod", [num(-7), num(2)]), {}) == 1
    assert evaluate(make("div", [num(-7), num(2)]), {}) == -4
    assert evaluate(make("div", [num(-7), num(-2)]), {}) == 4
    assert evaluate(make("mod", [num(7), num(-2)]), {}) == 1


def test_apps_and_funcs():
    a = var("a", INT)
    f = apply("bvand_4", (a, num(10)))
    t = make("+", [f, num(1)])
    assert evaluate(t, {"a": 12}, funcs={"bvand_4": true_bv_function("and", 4)}) == 9
    assert evaluate(t, {"a": 12}, apps={f: 3}) == 4
    with pytest.raises(IncompleteModelError):
        evaluate(t, {"a": 12})
    with pytest.raises(IncompleteModelError):
        evaluate(t, {}, apps={f: 3})


def test_brute_force_first_witness():
    x = var("x", bv_sort(2))
    r = brute_force_sat(make("bvult", [x, bv(1, 2)]))
    assert r.verdict == "sat" and r.assignment == {"x": 0}


def test_brute_force_unsat():
    x = var("x", bv_sort(2))
    assert brute_force_sat(make("distinct", [x, x])).verdict == "unsat"


def test_brute_force_extra_vars_and_bool():
    p = var("p", BOOL)
    y = var("y", bv_sort(1))
    r = brute_force_sat(p, extra_vars=[y])
    assert r.assignment == {"p": True, "y": 0}


def test_budget():
    bits = [var(f"b{i:02d}", bv_sort(1)) for i in range(30)]
    phi = make("and", [make("=", [b, bv(1, 1)]) for b in bits])
    with pytest.raises(BudgetExceeded):
        brute_force_sat(phi)


@pytest.mark.parametrize("width", [1, 2, 3, 4])
def test_equiv_or_elimination(width):
    s = bv_sort(width)
    t = make("bvor", [var("a", s), var("b", s)])
    assert check_equiv(t, eliminate_derived_ops(t))


def test_equiv_counterexample():
    s = bv_sort(2)
    a, b = var("a", s), var("b", s)
    r = check_equiv(make("bvxor", [a, b]), make("bvadd", [a, b]))
    assert not r and r.counterexample == {"a": 1, "b": 1}


def test_equiv_identical_and_sort_mismatch():
    x = var("x", bv_sort(3))
    assert check_equiv(x, x)
    with pytest.raises(ValueError):
        check_equiv(x, var("y", bv_sort(2)))


def test_true_functions():
    assert true_bv_function("and", 4)(12, 10) == 8
    assert true_bv_function("shl", 4)(3, 2) == 12
    assert true_bv_function("shl", 4)(3, 3) == 8
    assert true_bv_function("lshr", 4)(9, 4) == 0
    with pytest.raises(ValueError):
        true_bv_function("or", 4)
