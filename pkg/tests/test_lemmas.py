import pytest

from intblast.cegar import InternalError, Model, RefineState, check_spurious, refine
from intblast.frontend import parse_term
from intblast.lemmas import (
    EmptyCoreError, Tier, base_lemmas, core_lemma, expansion_term, full_expansion,
    instance_lemma,
)
from intblast.oracle import evaluate
from intblast.terms import INT, bv_sort, make, num, to_smtlib, var
from intblast.translate import translate_formula


def single_app(op, width, same_args=False):
    s = bv_sort(width)
    rhs = "x" if same_args else "y"
    phi = parse_term(f"(= ({op} x {rhs}) x)", {"x": s, "y": s})
    _, tm = translate_formula(phi, [("x", s), ("y", s)])
    (app,) = tm.app_index
    return app, tm


def holds(lemma, x, y, value):
    return evaluate(lemma.formula, {"x!0": x, "y!1": y}, apps={lemma.source.app_term: value})


def test_idempotence_for_equal_args():
    app, _ = single_app("bvand", 4, same_args=True)
    texts = [to_smtlib(lem.formula) for lem in base_lemmas(app)]
    assert "(=> (= x!0 x!0) (= (bvand_4 x!0 x!0) x!0))" in texts
    assert len(texts) == 9 and all(lem.tier == Tier.BASE for lem in base_lemmas(app))


def test_shift_base_lemmas():
    app, _ = single_app("bvshl", 4)
    texts = [to_smtlib(lem.formula) for lem in base_lemmas(app)]
    assert "(=> (= y!1 0) (= (bvshl_4 x!0 y!1) x!0))" in texts
    app, _ = single_app("bvlshr", 2)
    lemmas = base_lemmas(app)
    assert "(=> (>= y!1 2) (= (bvlshr_2 x!0 y!1) 0))" in [to_smtlib(l.formula) for l in lemmas]
    for x in range(4):
        for y in range(4):
            assert all(holds(l, x, y, (x >> y) if y < 2 else 0) for l in lemmas)


@pytest.mark.parametrize("op,alpha,beta,gamma", [
    ("bvand", 12, 10, 8), ("bvshl", 3, 2, 12), ("bvlshr", 9, 4, 0),
])
def test_instance_values(op, alpha, beta, gamma):
    app, _ = single_app(op, 4)
    lem = instance_lemma(app, alpha, beta)
    assert lem.tier == Tier.INSTANCE
    assert holds(lem, alpha, beta, gamma)
    assert not holds(lem, alpha, beta, (gamma + 1) % 16)
    assert holds(lem, alpha ^ 1, beta, (gamma + 1) % 16)
    with pytest.raises(ValueError):
        instance_lemma(app, 16, 0)


def test_expansion_values():
    a, b = var("a", INT), var("b", INT)
    assert evaluate(expansion_term("and", 2, a, b), {"a": 3, "b": 2}) == 2
    assert evaluate(expansion_term("shl", 2, a, b), {"a": 1, "b": 1}) == 2
    assert evaluate(expansion_term("lshr", 3, a, b), {"a": 6, "b": 7}) == 0


def test_full_expansion_tier():
    app, _ = single_app("bvand", 3)
    lem = full_expansion(app)
    assert lem.tier == Tier.FULL_EXPANSION and lem.source is app
    assert holds(lem, 5, 6, 4) and not holds(lem, 5, 6, 5)


def test_core_lemma_shapes():
    s = bv_sort(4)
    phi = parse_term("(= x y)", {"x": s, "y": s})
    _, tm = translate_formula(phi, [("x", s), ("y", s)])
    assert to_smtlib(core_lemma([("x", 3, 4)], tm).formula) == "(not (= x!0 3))"
    two = core_lemma([("x", 3, 4), ("y", 0, 4)], tm)
    assert to_smtlib(two.formula) == "(or (not (= x!0 3)) (not (= y!1 0)))"
    assert two.tier == Tier.UNDERAPPROX_CORE and two.source is None
    with pytest.raises(EmptyCoreError):
        core_lemma([], tm)


def model(tm, x, y, value):
    (app,) = tm.app_index
    return Model({"x!0": x, "y!1": y}, {app.app_term: value})


def test_check_spurious():
    app, tm = single_app("bvand", 4)
    assert check_spurious(model(tm, 12, 10, 8), tm) == []
    assert check_spurious(model(tm, 12, 10, 9), tm) == [app]
    _, empty = translate_formula(parse_term("(= x x)", {"x": bv_sort(2)}), [("x", bv_sort(2))])
    assert check_spurious(Model({"x!0": 1}, {}), empty) == []


def test_refine_escalation():
    app, tm = single_app("bvand", 2)
    history = {}
    mu = model(tm, 3, 2, 3)  # violates and <= b
    first = refine([app], mu, history, threshold=2)
    assert len(first) == 9 and all(l.tier == Tier.BASE for l in first)
    second = refine([app], mu, history, threshold=2)
    assert [l.tier for l in second] == [Tier.INSTANCE]
    refine([app], mu, history, threshold=2)
    third = refine([app], mu, history, threshold=2)
    assert [l.tier for l in third] == [Tier.FULL_EXPANSION]
    with pytest.raises(InternalError):
        refine([app], mu, history, threshold=2)


def test_refine_threshold_one_after_instance():
    app, tm = single_app("bvand", 2)
    history = {app.app_term: RefineState(base_done=True, instances=1)}
    out = refine([app], model(tm, 3, 2, 3), history, threshold=1)
    assert [l.tier for l in out] == [Tier.FULL_EXPANSION]


def test_refine_progress_when_base_batch_holds():
    # 2 & 1 = 0, but value 1 satisfies every base lemma
    app, tm = single_app("bvand", 2)
    mu = model(tm, 2, 1, 1)
    history = {}
    out = refine([app], mu, history)
    assert len(out) == 10 and out[-1].tier == Tier.INSTANCE and history[app.app_term].instances == 1
    assert evaluate(out[-1].formula, mu.var_values, apps=mu.app_values) is False
