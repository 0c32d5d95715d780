"""Bit-vector to integer translation.

Arithmetic operators become modular integer arithmetic; ``bvand``,
``bvshl`` and ``bvlshr`` become uninterpreted functions, one symbol per
operator and width.  Every translated variable and every abstracted
application gets an eager range constraint ``0 <= t <= 2^k - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import BOOL, INT, Sort, Term, apply, bv, make, num, subterms, var

ABSTRACTED = {"bvand": "and", "bvshl": "shl", "bvlshr": "lshr"}


class RangeError(ValueError):
    """An integer value does not fit the requested bit-width."""


@dataclass(frozen=True)
class AbstractedApp:
    op: str  # "and" | "shl" | "lshr"
    width: int
    arg_terms: tuple[Term, Term]
    app_term: Term
    origin: Term

    @property
    def symbol(self) -> str:
        return self.app_term.payload


@dataclass
class TranslationMap:
    # original name -> (integer/boolean variable name, width; 0 for Bool)
    var_map: dict[str, tuple[str, int]] = field(default_factory=dict)
    uf_registry: dict[tuple[str, int], str] = field(default_factory=dict)
    app_index: list[AbstractedApp] = field(default_factory=list)
    range_constraints: list[Term] = field(default_factory=list)
    _apps_by_term: dict[Term, AbstractedApp] = field(default_factory=dict, repr=False)
    _memo: dict[Term, Term] = field(default_factory=dict, repr=False)

    def translated_var(self, name: str) -> Term:
        new_name, width = self.var_map[name]
        return var(new_name, INT if width else BOOL)

    def app_for(self, app_term: Term) -> AbstractedApp | None:
        return self._apps_by_term.get(app_term)

    def declarations(self) -> list[tuple[str, Sort]]:
        return [(n, INT if w else BOOL) for n, w in self.var_map.values()]

    def functions(self) -> list[tuple[str, tuple[Sort, ...], Sort]]:
        return [(name, (INT, INT), INT) for name in self.uf_registry.values()]


def uf_name(op: str, width: int) -> str:
    return f"bv{op}_{width}"


def in_range(t: Term, width: int) -> Term:
    return make("and", [make("<=", [num(0), t]), make("<=", [t, num((1 << width) - 1)])])


def to_bv(value: int, width: int) -> Term:
    if not 0 <= value < (1 << width):
        raise RangeError(f"value {value} outside [0, 2^{width})")
    return bv(value, width)


def _uts(x: Term, k: int) -> Term:
    half = num(1 << (k - 1))
    return make("ite", [make(">=", [x, half]), make("-", [x, num(1 << k)]), x])


def _mod(x: Term, k: int) -> Term:
    return make("mod", [x, num(1 << k)])


def register_var(tm: TranslationMap, name: str, sort: Sort) -> Term:
    if name not in tm.var_map:
        new_name = f"{name}!{len(tm.var_map)}"
        width = sort.width if sort.is_bv else 0
        tm.var_map[name] = (new_name, width)
        if width:
            tm.range_constraints.append(in_range(var(new_name, INT), width))
    return tm.translated_var(name)


def _abstract(tm: TranslationMap, origin: Term, a: Term, b: Term) -> Term:
    op, k = ABSTRACTED[origin.op], origin.width
    name = tm.uf_registry.setdefault((op, k), uf_name(op, k))
    app_term = apply(name, (a, b), INT)
    if app_term not in tm._apps_by_term:
        app = AbstractedApp(op, k, (a, b), app_term, origin)
        tm._apps_by_term[app_term] = app
        tm.app_index.append(app)
        tm.range_constraints.append(in_range(app_term, k))
    return app_term


def _translate_node(t: Term, args: tuple, tm: TranslationMap) -> Term:
    op = t.op
    if op == "var":
        return register_var(tm, t.payload, t.sort)
    if op == "bv":
        return num(t.payload)
    if op == "bool":
        return t
    k = t.args[0].width if t.args and t.args[0].sort.is_bv else 0
    if op == "bvadd":
        return _mod(make("+", args), k)
    if op == "bvsub":
        return _mod(make("-", args), k)
    if op == "bvneg":
        return _mod(make("-", [num(1 << k), args[0]]), k)
    if op == "bvmul":
        return _mod(make("*", args), k)
    if op == "bvudiv":
        a, b = args
        return make("ite", [make("=", [b, num(0)]), num((1 << k) - 1), make("div", [a, b])])
    if op == "bvurem":
        a, b = args
        return make("ite", [make("=", [b, num(0)]), a, make("mod", [a, b])])
    if op == "bvnot":
        return make("-", [num((1 << k) - 1), args[0]])
    if op in ABSTRACTED:
        return _abstract(tm, t, *args)
    if op == "concat":
        a, b = args
        return make("+", [make("*", [a, num(1 << t.args[1].width)]), b])
    if op == "extract":
        hi, lo = t.params
        shifted = args[0] if lo == 0 else make("div", [args[0], num(1 << lo)])
        return make("mod", [shifted, num(1 << (hi - lo + 1))])
    if op == "zero_extend":
        return args[0]
    if op == "sign_extend":
        n, a = t.params[0], args[0]
        return make("ite", [make(">=", [a, num(1 << (k - 1))]),
                            make("+", [a, num((1 << k) * ((1 << n) - 1))]), a])
    if op == "bvult":
        return make("<", args)
    if op == "bvule":
        return make("<=", args)
    if op == "bvslt":
        return make("<", [_uts(a, k) for a in args])
    if op == "bvsle":
        return make("<=", [_uts(a, k) for a in args])
    if op in ("=", "ite", "and", "or", "not", "xor", "=>"):
        return make(op, args)
    raise ValueError(f"operator {op} is not in the core set; preprocess first")


def translate_term(t: Term, tm: TranslationMap) -> Term:
    """Integer/Boolean translation of a core-operator term, extending ``tm``."""
    memo = tm._memo
    for s in subterms(t):
        if s not in memo:
            memo[s] = _translate_node(s, tuple(memo[a] for a in s.args), tm)
    return memo[t]


def translate_formula(phi: Term, declarations=()) -> tuple[Term, TranslationMap]:
    """Translate a Bool-sorted core formula.

    Declared variables are registered in declaration order first, so
    symbol names are stable regardless of where variables occur.
    """
    if phi.sort != BOOL:
        raise ValueError("formula must be Bool-sorted")
    tm = TranslationMap()
    for name, sort in declarations:
        register_var(tm, name, sort)
    return translate_term(phi, tm), tm

