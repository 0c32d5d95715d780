"""Test corpus: seeded random QF_BV scripts and hand-crafted families."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .frontend import Script, parse_script, print_script
from .oracle import BudgetExceeded, brute_force_sat
from .terms import BOOL, Term, bv, bv_sort, make, var

BV_SAME_WIDTH = ("bvadd", "bvsub", "bvmul", "bvudiv", "bvurem", "bvsdiv", "bvsrem",
                 "bvsmod", "bvand", "bvor", "bvxor", "bvnand", "bvnor", "bvxnor",
                 "bvshl", "bvlshr", "bvashr")
BV_UNARY = ("bvneg", "bvnot", "rotate_left", "rotate_right")
BV_RESIZE = ("concat", "extract", "zero_extend", "sign_extend", "repeat", "bvcomp", "ite")
COMPARISONS = ("bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge",
               "=", "distinct")
CONNECTIVES = ("not", "and", "or", "xor", "=>")

DEFAULT_WEIGHTS = {op: 1.0 for op in BV_SAME_WIDTH + BV_UNARY + BV_RESIZE + COMPARISONS
                   + CONNECTIVES}
DEFAULT_WEIGHTS.update({"bvand": 2.0, "bvshl": 1.5, "bvlshr": 1.5, "=": 2.0, "bvult": 1.5})


@dataclass
class GeneratorSpec:
    seed: int = 0
    num_vars: int = 2
    widths: tuple[int, ...] = (1, 2, 3, 4)
    max_depth: int = 3
    op_weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    count: int = 10

    def __post_init__(self):
        if not 1 <= self.num_vars <= 3:
            raise ValueError("num_vars must be in 1..3")
        if not self.widths or not set(self.widths) <= {1, 2, 3, 4}:
            raise ValueError("widths must be a non-empty subset of {1, 2, 3, 4}")
        if not 1 <= self.max_depth <= 4:
            raise ValueError("max_depth must be in 1..4")
        if any(w < 0 for w in self.op_weights.values()) or not any(self.op_weights.values()):
            raise ValueError("weights must be non-negative and not all zero")
        if self.count < 0:
            raise ValueError("count must be non-negative")


class _Gen:
    def __init__(self, spec: GeneratorSpec, rng: random.Random, variables: list[Term]):
        self.spec = spec
        self.rng = rng
        self.vars = variables
        self.bvs = [v for v in variables if v.sort.is_bv]
        self.max_width = max(spec.widths)

    def pick(self, ops):
        weights = [self.spec.op_weights.get(op, 0.0) for op in ops]
        if not any(weights):
            return None
        return self.rng.choices(ops, weights)[0]

    def leaf(self, w: int) -> Term:
        same = [v for v in self.bvs if v.width == w]
        if same and self.rng.random() < 0.75:
            return self.rng.choice(same)
        wider = [v for v in self.bvs if v.width > w]
        if wider and self.rng.random() < 0.5:
            v = self.rng.choice(wider)
            lo = self.rng.randint(0, v.width - w)
            return make("extract", [v], (lo + w - 1, lo))
        narrower = [v for v in self.bvs if v.width < w]
        if narrower and self.rng.random() < 0.5:
            v = self.rng.choice(narrower)
            return make("zero_extend", [v], (w - v.width,))
        return bv(self.rng.randrange(1 << w), w)

    def bv_term(self, w: int, depth: int) -> Term:
        if depth <= 0 or self.rng.random() < 0.3:
            return self.leaf(w)
        candidates = list(BV_SAME_WIDTH + BV_UNARY) + ["ite"]
        if w >= 2:
            candidates += ["concat", "sign_extend", "zero_extend", "repeat"]
        if w < self.max_width:
            candidates.append("extract")
        if w == 1:
            candidates.append("bvcomp")
        op = self.pick(candidates)
        if op is None:
            return self.leaf(w)
        d = depth - 1
        rng = self.rng
        if op in BV_SAME_WIDTH:
            return make(op, [self.bv_term(w, d), self.bv_term(w, d)])
        if op in ("bvneg", "bvnot"):
            return make(op, [self.bv_term(w, d)])
        if op in ("rotate_left", "rotate_right"):
            return make(op, [self.bv_term(w, d)], (rng.randint(0, w + 1),))
        if op == "ite":
            return make("ite", [self.bool_term(d), self.bv_term(w, d), self.bv_term(w, d)])
        if op == "concat":
            m = rng.randint(1, w - 1)
            return make("concat", [self.bv_term(m, d), self.bv_term(w - m, d)])
        if op in ("sign_extend", "zero_extend"):
            n = rng.randint(1, w - 1)
            return make(op, [self.bv_term(w - n, d)], (n,))
        if op == "repeat":
            divisors = [n for n in range(2, w + 1) if w % n == 0]
            n = rng.choice(divisors)
            return make("repeat", [self.bv_term(w // n, d)], (n,))
        if op == "extract":
            src = rng.randint(w + 1, self.max_width)
            lo = rng.randint(0, src - w)
            return make("extract", [self.bv_term(src, d)], (lo + w - 1, lo))
        if op == "bvcomp":
            src = rng.choice(self.spec.widths)
            return make("bvcomp", [self.bv_term(src, d), self.bv_term(src, d)])
        raise AssertionError(op)

    def atom(self, depth: int) -> Term:
        op = self.pick(list(COMPARISONS)) or "="
        w = self.rng.choice([v.width for v in self.bvs] or list(self.spec.widths))
        if op == "distinct" and self.rng.random() < 0.3:
            args = [self.bv_term(w, depth) for _ in range(3)]
        else:
            args = [self.bv_term(w, depth), self.bv_term(w, depth)]
        return make(op, args)

    def bool_term(self, depth: int) -> Term:
        if depth <= 1:
            bool_vars = [v for v in self.vars if v.sort == BOOL]
            if bool_vars and self.rng.random() < 0.1:
                return self.rng.choice(bool_vars)
            return self.atom(0)
        op = self.pick(list(CONNECTIVES) + ["atom"]) if self.rng.random() < 0.5 else "atom"
        if op in (None, "atom"):
            return self.atom(depth - 1)
        if op == "not":
            return make("not", [self.bool_term(depth - 1)])
        return make(op, [self.bool_term(depth - 1), self.bool_term(depth - 1)])


def generate(spec: GeneratorSpec) -> list[Script]:
    """Deterministic in ``spec.seed``; every script parses from its own text."""
    rng = random.Random(spec.seed)
    scripts = []
    for _ in range(spec.count):
        variables = [var(f"x{i}", bv_sort(rng.choice(spec.widths)))
                     for i in range(spec.num_vars)]
        phi = _Gen(spec, rng, variables).bool_term(spec.max_depth)
        decls = tuple((v.payload, v.sort) for v in variables)
        scripts.append(Script(logic="QF_BV", declarations=decls, assertions=(phi,),
                              check_sat=True))
    return scripts


def random_formula(seed: int, num_vars: int = 2, max_depth: int = 3,
                   widths=(1, 2, 3, 4), bool_vars: int = 0):
    """One random formula and its declarations (Bool variables optional)."""
    rng = random.Random(seed)
    spec = GeneratorSpec(seed=seed, num_vars=num_vars, widths=tuple(widths),
                         max_depth=max_depth, count=1)
    variables = [var(f"x{i}", bv_sort(rng.choice(spec.widths))) for i in range(num_vars)]
    variables += [var(f"p{i}", BOOL) for i in range(bool_vars)]
    phi = _Gen(spec, rng, variables).bool_term(max_depth)
    return [(v.payload, v.sort) for v in variables], phi


def script_text(script: Script) -> str:
    return print_script(script.logic or "QF_BV", script.declarations, script.assertions)


_FAMILIES = {
    # (a) pure arithmetic, no abstracted operators
    "a/add-w8": ("x", 8, "(= (bvadd x #x09) #x02)"),
    "a/linear-w16": ("x", 16, "(= (bvadd (bvmul x #x0003) #x0001) #x000a)"),
    "a/divrem-w8": ("x", 8, "(and (= (bvudiv x #x07) #x05) (= (bvurem x #x07) #x03))"),
    "a/neg-fix-w8": ("x", 8, "(and (= (bvneg x) x) (distinct x #x00))"),
    "a/mul-comm-w4": ("x y", 4, "(not (= (bvmul x y) (bvmul y x)))"),
    "a/mul-comm-w16": ("x y", 16, "(not (= (bvmul x y) (bvmul y x)))"),
    "a/sub-w32": ("x y", 32, "(and (= (bvsub x y) #x00000001) (= x #x00000000))"),
    "a/order-w32": ("x y", 32, "(and (bvult x y) (bvult y x))"),
    # (b) bvand identities
    "b/idem-w4": ("x", 4, "(not (= (bvand x x) x))"),
    "b/idem-w8": ("x", 8, "(not (= (bvand x x) x))"),
    "b/comm-w4": ("x y", 4, "(not (= (bvand x y) (bvand y x)))"),
    "b/zero-w8": ("x", 8, "(not (= (bvand x #x00) #x00))"),
    "b/subset-w4": ("x y", 4, "(and (= (bvand x y) x) (bvult y x))"),
    "b/and-or-w4": ("x y", 4, "(and (= (bvand x y) #x5) (= (bvor x y) #xf))"),
    # (c) shifts
    "c/shl-lshr-w8": ("x", 8, "(not (= (bvlshr (bvshl x #x01) #x01) (bvand x #x7f)))"),
    "c/shl-mul-w4": ("x", 4, "(not (= (bvshl x #x2) (bvmul x #x4)))"),
    "c/shl-amount-w4": ("x y", 4, "(and (= (bvshl x y) #x8) (= x #x1))"),
    "c/lshr-big-w4": ("x y", 4, "(and (not (= (bvlshr x y) #x0)) (bvuge y #x4))"),
    "c/ladder-w4": ("x y", 4, "(and (= (bvlshr (bvshl x y) y) x) (= y #x2) (bvuge x #x4))"),
    # (d) mixed, where pinning the arithmetic part leaves the bit-wise part solvable
    "d/mixed-w4": ("x y z", 4,
                   "(and (= (bvand x y) #x3) (= (bvadd z #x1) #x5) (bvult x y))"),
    "d/mixed-w8": ("x z", 8, "(and (= (bvand x #x0f) #x0a) (= (bvmul z #x03) #x0f))"),
    "d/mixed-or-w4": ("x y z", 4,
                      "(and (= (bvor x y) #xe) (= (bvsub z y) #x2) (bvugt z #x9))"),
    "d/mixed-unsat-w4": ("x y z", 4, "(and (= (bvand x y) z) (bvugt z x))"),
    # (e) decided by pinning the operation bit by bit
    "e/and-masks-w3": ("x", 3, "(and (= (bvand x #b101) #b100) (= (bvand x #b010) #b010))"),
    "e/and-masks-unsat-w3": ("x", 3, "(and (= (bvand x #b101) #b100) (= (bvand x #b011) #b010)"
                                     " (= (bvand x #b110) #b000))"),
    "e/and-chain-w4": ("x y z", 4, "(and (= (bvand (bvand x y) z) #xf) (bvult x #xf))"),
}


def crafted_families() -> list[tuple[str, Script]]:
    out = []
    for name, (names, width, body) in _FAMILIES.items():
        decls = "".join(f"(declare-const {n} (_ BitVec {width}))" for n in names.split())
        text = f"(set-logic QF_BV){decls}(assert {body})(check-sat)"
        out.append((name, parse_script(text)))
    return out


def oracle_verdict(script: Script) -> str | None:
    """Brute-force verdict, or None when beyond the oracle budget."""
    extra = [var(n, s) for n, s in script.declarations]
    try:
        return brute_force_sat(script.formula(), extra_vars=extra).verdict
    except BudgetExceeded:
        return None


def write_corpus(directory, entries) -> Path:
    """Write ``(family, name, Script)`` entries as .smt2 files plus manifest.jsonl."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = directory / "manifest.jsonl"
    with manifest.open("w") as f:
        for family, name, script in entries:
            path = directory / f"{name.replace('/', '_')}.smt2"
            path.write_text(script_text(script))
            f.write(json.dumps({"path": path.name, "oracle": oracle_verdict(script),
                                "family": family}) + "\n")
    return manifest


def default_corpus(seed: int = 2020, per_spec: int = 60) -> list[tuple[str, str, Script]]:
    """Mixed random corpus over 1-3 variables and depths 1-4, plus crafted families."""
    entries = []
    n = 0
    for num_vars in (1, 2, 3):
        for depth in (1, 2, 3, 4):
            spec = GeneratorSpec(seed=seed + 97 * num_vars + depth, num_vars=num_vars,
                                 max_depth=depth, count=per_spec)
            for script in generate(spec):
                entries.append(("random", f"random/{n:04d}", script))
                n += 1
    for name, script in crafted_families():
        entries.append((name.split("/")[0], name, script))
    return entries
