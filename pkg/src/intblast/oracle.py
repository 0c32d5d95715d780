"""Ground-truth evaluation and brute-force decision for small formulas.

Everything here follows the SMT-LIB definitions directly on Python
integers.  It deliberately shares no code with the preprocessor or the
translator, because tests use it to check both.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .terms import BOOL, Term, free_vars, subterms

BUDGET = 1 << 24


class BudgetExceeded(Exception):
    """The enumeration space is larger than the oracle budget."""


class IncompleteModelError(KeyError):
    """A value needed for evaluation is missing from the assignment."""


def to_signed(value: int, width: int) -> int:
    return value - (1 << width) if value >> (width - 1) else value


def _bvsdiv(s, t, k):
    s, t = to_signed(s, k), to_signed(t, k)
    if t == 0:
        q = -1 if s >= 0 else 1
    else:
        q = abs(s) // abs(t)
        if (s < 0) != (t < 0):
            q = -q
    return q % (1 << k)


def _bvsrem(s, t, k):
    s, t = to_signed(s, k), to_signed(t, k)
    if t == 0:
        r = s
    else:
        r = abs(s) % abs(t)
        if s < 0:
            r = -r
    return r % (1 << k)


def _bvsmod(s, t, k):
    s, t = to_signed(s, k), to_signed(t, k)
    # Python's % takes the sign of the divisor, which is the bvsmod rule
    r = s if t == 0 else s % t
    return r % (1 << k)


def _rotl(a, r, k):
    r %= k
    return ((a << r) | (a >> (k - r))) & ((1 << k) - 1)


def _int_div(a, b):
    if b == 0:
        return 0  # unconstrained in SMT-LIB; callers guard against it
    r = a % abs(b)
    return (a - r) // b


def _int_mod(a, b):
    return a if b == 0 else a % abs(b)


def _xor(*xs):
    acc = False
    for x in xs:
        acc ^= x
    return acc


def _chain(pred):
    return lambda *xs: all(pred(a, b) for a, b in zip(xs, xs[1:]))


def _minus(*xs):
    if len(xs) == 1:
        return -xs[0]
    acc = xs[0]
    for x in xs[1:]:
        acc -= x
    return acc


def _product(*xs):
    acc = 1
    for x in xs:
        acc *= x
    return acc


def _distinct(*xs):
    return len(set(xs)) == len(xs)


def _node_fn(t: Term) -> Callable:
    """Python function computing ``t`` from its children's values."""
    op = t.op
    k = t.args[0].width if t.args and t.args[0].sort.is_bv else 0
    m = (1 << k) - 1
    if op == "bvadd":
        return lambda a, b: (a + b) & m
    if op == "bvsub":
        return lambda a, b: (a - b) & m
    if op == "bvneg":
        return lambda a: (-a) & m
    if op == "bvmul":
        return lambda a, b: (a * b) & m
    if op == "bvudiv":
        return lambda a, b: m if b == 0 else a // b
    if op == "bvurem":
        return lambda a, b: a if b == 0 else a % b
    if op == "bvsdiv":
        return lambda a, b: _bvsdiv(a, b, k)
    if op == "bvsrem":
        return lambda a, b: _bvsrem(a, b, k)
    if op == "bvsmod":
        return lambda a, b: _bvsmod(a, b, k)
    if op == "bvnot":
        return lambda a: a ^ m
    if op == "bvand":
        return lambda a, b: a & b
    if op == "bvor":
        return lambda a, b: a | b
    if op == "bvxor":
        return lambda a, b: a ^ b
    if op == "bvnand":
        return lambda a, b: (a & b) ^ m
    if op == "bvnor":
        return lambda a, b: (a | b) ^ m
    if op == "bvxnor":
        return lambda a, b: (a ^ b) ^ m
    if op == "bvcomp":
        return lambda a, b: int(a == b)
    if op == "bvshl":
        return lambda a, b: 0 if b >= k else (a << b) & m
    if op == "bvlshr":
        return lambda a, b: 0 if b >= k else a >> b
    if op == "bvashr":
        return lambda a, b: (to_signed(a, k) >> min(b, k)) & m
    if op == "concat":
        n = t.args[1].width
        return lambda a, b: (a << n) | b
    if op == "extract":
        hi, lo = t.params
        mask = (1 << (hi - lo + 1)) - 1
        return lambda a: (a >> lo) & mask
    if op == "zero_extend":
        return lambda a: a
    if op == "sign_extend":
        wide = (1 << t.width) - 1
        return lambda a: to_signed(a, k) & wide
    if op == "rotate_left":
        r = t.params[0]
        return lambda a: _rotl(a, r, k)
    if op == "rotate_right":
        r = t.params[0]
        return lambda a: _rotl(a, k - r % k, k)
    if op == "repeat":
        n = t.params[0]
        return lambda a: sum(a << (i * k) for i in range(n))
    if op == "bvult":
        return lambda a, b: a < b
    if op == "bvule":
        return lambda a, b: a <= b
    if op == "bvugt":
        return lambda a, b: a > b
    if op == "bvuge":
        return lambda a, b: a >= b
    if op == "bvslt":
        return lambda a, b: to_signed(a, k) < to_signed(b, k)
    if op == "bvsle":
        return lambda a, b: to_signed(a, k) <= to_signed(b, k)
    if op == "bvsgt":
        return lambda a, b: to_signed(a, k) > to_signed(b, k)
    if op == "bvsge":
        return lambda a, b: to_signed(a, k) >= to_signed(b, k)
    if op == "=":
        return _chain(lambda a, b: a == b)
    if op == "distinct":
        return _distinct
    if op == "ite":
        return lambda c, a, b: a if c else b
    if op == "not":
        return lambda a: not a
    if op == "and":
        return lambda *xs: all(xs)
    if op == "or":
        return lambda *xs: any(xs)
    if op == "xor":
        return _xor
    if op == "=>":
        return lambda a, b: (not a) or b
    if op == "+":
        return lambda *xs: sum(xs)
    if op == "-":
        return _minus
    if op == "*":
        return _product
    if op == "div":
        return _int_div
    if op == "mod":
        return _int_mod
    if op == "<":
        return _chain(lambda a, b: a < b)
    if op == "<=":
        return _chain(lambda a, b: a <= b)
    if op == ">":
        return _chain(lambda a, b: a > b)
    if op == ">=":
        return _chain(lambda a, b: a >= b)
    raise ValueError(f"cannot evaluate operator {op}")


class Evaluator:
    """A term compiled once for repeated evaluation under many assignments.

    ``funcs`` interprets uninterpreted function symbols by name; ``apps``
    gives values for specific application terms and takes precedence.
    """

    def __init__(self, t: Term):
        self.term = t
        self.nodes = list(subterms(t))
        index = {n: i for i, n in enumerate(self.nodes)}
        self.plan = []
        for n in self.nodes:
            child_idx = tuple(index[a] for a in n.args)
            if n.op == "var":
                self.plan.append(("var", n.payload, child_idx))
            elif n.op in ("bv", "int", "bool"):
                self.plan.append(("const", n.payload, child_idx))
            elif n.op == "apply":
                self.plan.append(("apply", n, child_idx))
            else:
                self.plan.append(("op", _node_fn(n), child_idx))

    def __call__(self, env: Mapping, funcs: Mapping | None = None,
                 apps: Mapping | None = None):
        vals = []
        push = vals.append
        for kind, data, child_idx in self.plan:
            if kind == "const":
                push(data)
            elif kind == "var":
                try:
                    push(env[data])
                except KeyError:
                    raise IncompleteModelError(f"no value for variable {data}") from None
            elif kind == "op":
                push(data(*[vals[i] for i in child_idx]))
            else:
                if apps is not None and data in apps:
                    push(apps[data])
                elif funcs is not None and data.payload in funcs:
                    push(funcs[data.payload](*[vals[i] for i in child_idx]))
                else:
                    raise IncompleteModelError(f"no value for application {data!r}")
        return vals[-1]


def evaluate(t: Term, env: Mapping, funcs: Mapping | None = None,
             apps: Mapping | None = None):
    """Value of ``t``: an unsigned integer for bit-vectors, bool for Bool.

    Int-sorted terms are also supported, with SMT-LIB ``div``/``mod``.
    """
    return Evaluator(t)(env, funcs, apps)


@dataclass
class OracleResult:
    verdict: str  # "sat" | "unsat"
    assignment: dict = field(default_factory=dict)


@dataclass
class Equivalence:
    equivalent: bool
    counterexample: dict | None = None

    def __bool__(self) -> bool:
        return self.equivalent


def _domain(sort):
    if sort == BOOL:
        return (False, True)
    if sort.is_bv:
        return range(1 << sort.width)
    raise ValueError(f"cannot enumerate sort {sort}")


def _space(variables, budget: int):
    total = 1
    for v in variables:
        total *= len(_domain(v.sort))
    if total > budget:
        raise BudgetExceeded(f"{total} assignments exceed the budget of {budget}")
    return itertools.product(*[_domain(v.sort) for v in variables])


def _sorted_vars(*terms: Term) -> list[Term]:
    seen = {}
    for t in terms:
        for v in free_vars(t):
            seen.setdefault(v.payload, v)
    return [seen[name] for name in sorted(seen)]


def brute_force_sat(phi: Term, budget: int = BUDGET, extra_vars=()) -> OracleResult:
    """Enumerate assignments (variables by name, values ascending).

    ``extra_vars`` adds declared variables that do not occur in ``phi``;
    they are enumerated too so the witness covers every declaration.
    """
    variables = _sorted_vars(phi, *extra_vars)
    names = [v.payload for v in variables]
    ev = Evaluator(phi)
    for values in _space(variables, budget):
        env = dict(zip(names, values))
        if ev(env):
            return OracleResult("sat", env)
    return OracleResult("unsat")


def check_equiv(lhs: Term, rhs: Term, budget: int = BUDGET) -> Equivalence:
    if lhs.sort != rhs.sort:
        raise ValueError(f"sort mismatch: {lhs.sort} vs {rhs.sort}")
    variables = _sorted_vars(lhs, rhs)
    names = [v.payload for v in variables]
    ev_l, ev_r = Evaluator(lhs), Evaluator(rhs)
    for values in _space(variables, budget):
        env = dict(zip(names, values))
        if ev_l(env) != ev_r(env):
            return Equivalence(False, env)
    return Equivalence(True)


def true_bv_function(op: str, width: int) -> Callable[[int, int], int]:
    """Unsigned semantics of the abstracted operators on in-range values."""
    m = (1 << width) - 1
    if op == "and":
        return lambda a, b: a & b
    if op == "shl":
        return lambda a, b: 0 if b >= width else (a << b) & m
    if op == "lshr":
        return lambda a, b: 0 if b >= width else a >> b
    raise ValueError(f"not an abstracted operator: {op}")
