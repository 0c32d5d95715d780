"""Elimination of derived bit-vector operators.

Everything bit-wise is routed through ``bvand`` and ``bvnot``; signed
division and remainder go through their unsigned counterparts; rotations
and ``repeat`` become ``concat``/``extract``.  Signed comparisons are kept
because the translator handles them directly.
"""

from __future__ import annotations

from collections import Counter

from .terms import Term, bv, conj, make, rebuild, subterms, transform

CORE_OPS = frozenset({
    "bvadd", "bvsub", "bvneg", "bvmul", "bvudiv", "bvurem", "bvnot", "bvand",
    "bvshl", "bvlshr", "concat", "extract", "zero_extend", "sign_extend",
    "bvult", "bvule", "bvslt", "bvsle", "=", "ite",
    "and", "or", "not", "xor", "=>",
})
_LEAVES = frozenset({"var", "bv", "bool", "int"})


def bvnot(a: Term) -> Term:
    # literals are folded and double negations cancelled; both keep the value
    if a.op == "bv":
        return bv(a.payload ^ ((1 << a.width) - 1), a.width)
    if a.op == "bvnot":
        return a.args[0]
    return make("bvnot", [a])


def bvand(a: Term, b: Term) -> Term:
    return make("bvand", [a, b])


def bvor(a: Term, b: Term) -> Term:
    return bvnot(bvand(bvnot(a), bvnot(b)))


def bvxor(a: Term, b: Term) -> Term:
    # and-bits are a subset of or-bits, so the subtraction never borrows
    return make("bvsub", [bvor(a, b), bvand(a, b)])


def _msb(a: Term) -> Term:
    k = a.width
    return make("extract", [a], (k - 1, k - 1))


def _is_zero_bit(bit: Term) -> Term:
    return make("=", [bit, bv(0, 1)])


def _ite(c, a, b):
    return make("ite", [c, a, b])


def _neg(a):
    return make("bvneg", [a])


def _signed_cases(s: Term, t: Term):
    s_pos, t_pos = _is_zero_bit(_msb(s)), _is_zero_bit(_msb(t))
    s_neg, t_neg = make("not", [s_pos]), make("not", [t_pos])
    return s_pos, t_pos, s_neg, t_neg


def bvsdiv(s: Term, t: Term) -> Term:
    s_pos, t_pos, s_neg, t_neg = _signed_cases(s, t)
    udiv = lambda a, b: make("bvudiv", [a, b])
    return _ite(conj([s_pos, t_pos]), udiv(s, t),
                _ite(conj([s_neg, t_pos]), _neg(udiv(_neg(s), t)),
                     _ite(conj([s_pos, t_neg]), _neg(udiv(s, _neg(t))),
                          udiv(_neg(s), _neg(t)))))


def bvsrem(s: Term, t: Term) -> Term:
    s_pos, t_pos, s_neg, t_neg = _signed_cases(s, t)
    urem = lambda a, b: make("bvurem", [a, b])
    return _ite(conj([s_pos, t_pos]), urem(s, t),
                _ite(conj([s_neg, t_pos]), _neg(urem(_neg(s), t)),
                     _ite(conj([s_pos, t_neg]), urem(s, _neg(t)),
                          _neg(urem(_neg(s), _neg(t))))))


def bvsmod(s: Term, t: Term) -> Term:
    s_pos, t_pos, s_neg, t_neg = _signed_cases(s, t)
    abs_s = _ite(s_pos, s, _neg(s))
    abs_t = _ite(t_pos, t, _neg(t))
    u = make("bvurem", [abs_s, abs_t])
    add = lambda a, b: make("bvadd", [a, b])
    return _ite(make("=", [u, bv(0, s.width)]), u,
                _ite(conj([s_pos, t_pos]), u,
                     _ite(conj([s_neg, t_pos]), add(_neg(u), t),
                          _ite(conj([s_pos, t_neg]), add(u, t), _neg(u)))))


def bvashr(a: Term, b: Term) -> Term:
    return _ite(_is_zero_bit(_msb(a)),
                make("bvlshr", [a, b]),
                bvnot(make("bvlshr", [bvnot(a), b])))


def rotate_left(a: Term, amount: int) -> Term:
    k = a.width
    r = amount % k
    if r == 0:
        return a
    return make("concat", [make("extract", [a], (k - 1 - r, 0)),
                           make("extract", [a], (k - 1, k - r))])


def rotate_right(a: Term, amount: int) -> Term:
    k = a.width
    r = amount % k
    if r == 0:
        return a
    return make("concat", [make("extract", [a], (r - 1, 0)),
                           make("extract", [a], (k - 1, r))])


def repeat(a: Term, n: int) -> Term:
    t = a
    for _ in range(n - 1):
        t = make("concat", [t, a])
    return t


def distinct(args) -> Term:
    pairs = [make("not", [make("=", [a, b])])
             for i, a in enumerate(args) for b in args[i + 1:]]
    return conj(pairs)


_SWAP = {"bvugt": "bvult", "bvuge": "bvule", "bvsgt": "bvslt", "bvsge": "bvsle"}


def _rewrite(node: Term, args: tuple) -> Term:
    op = node.op
    if op == "bvor":
        return bvor(*args)
    if op == "bvxor":
        return bvxor(*args)
    if op == "bvnand":
        return bvnot(bvand(*args))
    if op == "bvnor":
        return bvnot(bvor(*args))
    if op == "bvxnor":
        return bvnot(bvxor(*args))
    if op == "bvnot":
        return make("bvnot", args)
    if op == "bvcomp":
        return _ite(make("=", args), bv(1, 1), bv(0, 1))
    if op == "bvashr":
        return bvashr(*args)
    if op == "bvsdiv":
        return bvsdiv(*args)
    if op == "bvsrem":
        return bvsrem(*args)
    if op == "bvsmod":
        return bvsmod(*args)
    if op == "rotate_left":
        return rotate_left(args[0], node.params[0])
    if op == "rotate_right":
        return rotate_right(args[0], node.params[0])
    if op == "repeat":
        return repeat(args[0], node.params[0])
    if op in _SWAP:
        return make(_SWAP[op], [args[1], args[0]])
    if op == "distinct":
        return distinct(args)
    return rebuild(node, args)


def eliminate_derived_ops(t: Term) -> Term:
    """Rewrite ``t`` bottom-up into the core operator set.

    >>> from intblast.frontend import parse_term
    >>> from intblast.terms import bv_sort
    >>> eliminate_derived_ops(parse_term("(bvor x #x0)", {"x": bv_sort(4)}))
    (bvnot (bvand (bvnot x) #b1111))
    """
    return transform(t, _rewrite)


def count_core_ops(t: Term) -> dict[str, int]:
    """Operator census over the tree (leaves are not counted)."""
    counts: Counter = Counter()
    memo: dict[Term, Counter] = {}
    for s in subterms(t):
        c = Counter()
        for a in s.args:
            c.update(memo[a])
        if s.op not in _LEAVES:
            c[s.op] += 1
        memo[s] = c
    counts.update(memo[t])
    return dict(counts)


def non_core_ops(t: Term) -> set[str]:
    return {s.op for s in subterms(t) if s.op not in _LEAVES and s.op not in CORE_OPS}
