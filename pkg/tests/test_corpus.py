import json

import pytest

from intblast.corpus import (
    DEFAULT_WEIGHTS, GeneratorSpec, crafted_families, default_corpus, generate,
    oracle_verdict, script_text, write_corpus,
)
from intblast.frontend import parse_script
from intblast.oracle import brute_force_sat, evaluate
from intblast.preprocess import eliminate_derived_ops
from intblast.terms import subterms
from intblast.translate import translate_formula

ATOMS = {"bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge", "=", "distinct"}


def test_deterministic():
    a = generate(GeneratorSpec(seed=1, count=2))
    b = generate(GeneratorSpec(seed=1, count=2))
    assert [script_text(s) for s in a] == [script_text(s) for s in b]
    c = generate(GeneratorSpec(seed=2, count=2))
    assert [script_text(s) for s in a] != [script_text(s) for s in c]


def test_scripts_reparse():
    for s in generate(GeneratorSpec(seed=5, num_vars=3, max_depth=4, count=30)):
        back = parse_script(script_text(s))
        assert back.assertions == s.assertions and back.declarations == s.declarations


def test_depth_one_is_atomic():
    for s in generate(GeneratorSpec(seed=3, max_depth=1, count=40)):
        (phi,) = s.assertions
        assert phi.op in ATOMS
        # leaves are variables, literals, or a variable resized to the atom's width
        for a in phi.args:
            assert a.op in ("var", "bv") or (a.op in ("extract", "zero_extend")
                                             and a.args[0].op == "var")


def test_weights_concentrate_on_abstracted_ops():
    weights = {op: 0.05 for op in DEFAULT_WEIGHTS}
    weights.update({"bvand": 10.0, "bvshl": 10.0})
    scripts = generate(GeneratorSpec(seed=11, max_depth=3, op_weights=weights, count=50))
    apps = 0
    for s in scripts:
        _, tm = translate_formula(eliminate_derived_ops(s.formula()), s.declarations)
        apps += len(tm.app_index)
    assert apps / len(scripts) >= 1


@pytest.mark.parametrize("kwargs", [
    {"num_vars": 0}, {"num_vars": 4}, {"widths": (5,)}, {"widths": ()},
    {"max_depth": 0}, {"max_depth": 5}, {"op_weights": {"bvand": 0.0}}, {"count": -1},
])
def test_generator_settings_validation(kwargs):
    with pytest.raises(ValueError):
        GeneratorSpec(**kwargs)


def families():
    return dict(crafted_families())


def test_family_e_models():
    s = families()["e/and-masks-w3"]
    sols = [x for x in range(8) if evaluate(s.formula(), {"x": x})]
    # 7 & 5 = 5, so only 110 survives both masks
    assert sols == [6]


@pytest.mark.parametrize("name,verdict", [
    ("b/idem-w4", "unsat"), ("a/mul-comm-w4", "unsat"), ("e/and-masks-unsat-w3", "unsat"),
    ("d/mixed-w4", "sat"), ("c/shl-amount-w4", "sat"),
])
def test_family_verdicts(name, verdict):
    assert oracle_verdict(families()[name]) == verdict


def test_wide_families_have_no_oracle():
    fam = families()
    assert oracle_verdict(fam["a/mul-comm-w16"]) is None
    assert not any(s.op in ("bvand", "bvshl", "bvlshr") for s in subterms(fam["a/mul-comm-w16"].formula()))


def test_default_corpus_size():
    entries = default_corpus()
    random_entries = [e for e in entries if e[0] == "random"]
    assert len(random_entries) >= 500
    assert {e[0] for e in entries} == {"random", "a", "b", "c", "d", "e"}


def test_write_corpus(tmp_path):
    entries = [("random", "random/0000", generate(GeneratorSpec(seed=9, count=1))[0])]
    entries += [(n.split("/")[0], n, s) for n, s in crafted_families()[:3]]
    manifest = write_corpus(tmp_path, entries)
    rows = [json.loads(line) for line in manifest.read_text().splitlines()]
    assert len(rows) == 4 and rows[0]["family"] == "random"
    for row, (_, _, script) in zip(rows, entries):
        back = parse_script((tmp_path / row["path"]).read_text())
        assert row["oracle"] == oracle_verdict(back)
        if row["oracle"] is not None:
            assert row["oracle"] == brute_force_sat(back.formula()).verdict
