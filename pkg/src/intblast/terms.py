"""Sorted terms shared by every stage of the pipeline.

A :class:`Term` is an immutable node: an operator tag, a tuple of children,
integer indices (for ``extract`` and friends), an optional payload (variable
name, literal value, function name) and its :class:`Sort`.  Terms are built
through :func:`make`, which performs SMT-LIB sort checking, or through the
small leaf constructors below.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator


class SortError(Exception):
    """Raised when a term is ill-typed."""


class UnsupportedError(Exception):
    """Raised for operators or commands outside the supported set."""

    def __init__(self, symbol: str, message: str | None = None):
        self.symbol = symbol
        super().__init__(message or f"unsupported symbol: {symbol}")


@dataclass(frozen=True)
class Sort:
    kind: str  # "BitVec" | "Bool" | "Int"
    width: int = 0

    def __post_init__(self):
        if self.kind == "BitVec" and self.width < 1:
            raise SortError(f"bit-vector width must be positive, got {self.width}")

    @property
    def is_bv(self) -> bool:
        return self.kind == "BitVec"

    def __str__(self) -> str:
        if self.kind == "BitVec":
            return f"(_ BitVec {self.width})"
        return self.kind


BOOL = Sort("Bool")
INT = Sort("Int")


def bv_sort(width: int) -> Sort:
    return Sort("BitVec", width)


# Operator groups.  Leaves use the tags "var", "bv", "int", "bool".
BV_BINARY = frozenset({
    "bvadd", "bvsub", "bvmul", "bvudiv", "bvurem", "bvsdiv", "bvsrem", "bvsmod",
    "bvand", "bvor", "bvxor", "bvnand", "bvnor", "bvxnor",
    "bvshl", "bvlshr", "bvashr",
})
BV_UNARY = frozenset({"bvneg", "bvnot"})
BV_COMPARE = frozenset({
    "bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge",
})
BV_INDEXED = {
    "extract": 2, "zero_extend": 1, "sign_extend": 1,
    "rotate_left": 1, "rotate_right": 1, "repeat": 1,
}
# bvadd/bvmul/bvand/bvor/bvxor are left-associative in SMT-LIB
BV_LEFT_ASSOC = frozenset({"bvadd", "bvmul", "bvand", "bvor", "bvxor"})
BOOL_NARY = frozenset({"and", "or", "xor"})
INT_ARITH = frozenset({"+", "-", "*"})
INT_DIVMOD = frozenset({"div", "mod"})
INT_COMPARE = frozenset({"<", "<=", ">", ">="})

BV_OPS = BV_BINARY | BV_UNARY | BV_COMPARE | {"concat", "bvcomp"} | set(BV_INDEXED)


class Term:
    """Immutable, structurally compared term node."""

    __slots__ = ("op", "args", "params", "payload", "sort", "_hash")

    def __init__(self, op: str, args: tuple = (), params: tuple = (),
                 payload=None, sort: Sort = BOOL):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "params", tuple(params))
        object.__setattr__(self, "payload", payload)
        object.__setattr__(self, "sort", sort)
        object.__setattr__(self, "_hash", hash((op, self.args, self.params, payload, sort)))

    def __setattr__(self, name, value):
        raise AttributeError("Term is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term) or self._hash != other._hash:
            return False
        return (self.op == other.op and self.payload == other.payload
                and self.params == other.params and self.sort == other.sort
                and self.args == other.args)

    def __repr__(self) -> str:
        return to_smtlib(self)

    @property
    def width(self) -> int:
        return self.sort.width

    @property
    def is_leaf(self) -> bool:
        return not self.args and self.op in ("var", "bv", "int", "bool", "call", "apply")


# -- leaves ---------------------------------------------------------------

def var(name: str, sort: Sort) -> Term:
    return Term("var", payload=name, sort=sort)


def bv(value: int, width: int) -> Term:
    if width < 1:
        raise SortError(f"bit-vector width must be positive, got {width}")
    if not 0 <= value < (1 << width):
        raise SortError(f"literal {value} does not fit in {width} bits")
    return Term("bv", payload=value, sort=bv_sort(width))


def num(value: int) -> Term:
    return Term("int", payload=int(value), sort=INT)


TRUE = Term("bool", payload=True, sort=BOOL)
FALSE = Term("bool", payload=False, sort=BOOL)


def boolean(value: bool) -> Term:
    return TRUE if value else FALSE


def apply(name: str, args: Iterable[Term], sort: Sort = INT) -> Term:
    """Application of an uninterpreted function symbol."""
    return Term("apply", tuple(args), payload=name, sort=sort)


def call(name: str, args: Iterable[Term], sort: Sort) -> Term:
    """Unexpanded application of a ``define-fun`` macro."""
    return Term("call", tuple(args), payload=name, sort=sort)


# -- sort checking ----------------------------------------------------------

def _same_bv(op: str, args) -> int:
    if not args or any(not a.sort.is_bv for a in args):
        raise SortError(f"{op} expects bit-vector arguments")
    w = args[0].width
    if any(a.width != w for a in args):
        raise SortError(f"{op} expects arguments of equal width, got "
                        + ", ".join(str(a.width) for a in args))
    return w


def _arity(op: str, args, n: int):
    if len(args) != n:
        raise SortError(f"{op} expects {n} argument(s), got {len(args)}")


def make(op: str, args: Iterable[Term] = (), params: Iterable[int] = ()) -> Term:
    """Build an operator application, checking sorts per SMT-LIB rules."""
    args = tuple(args)
    params = tuple(params)
    if op in BV_BINARY:
        _arity(op, args, 2)
        sort = bv_sort(_same_bv(op, args))
    elif op in BV_UNARY:
        _arity(op, args, 1)
        sort = bv_sort(_same_bv(op, args))
    elif op in BV_COMPARE:
        _arity(op, args, 2)
        _same_bv(op, args)
        sort = BOOL
    elif op == "bvcomp":
        _arity(op, args, 2)
        _same_bv(op, args)
        sort = bv_sort(1)
    elif op == "concat":
        _arity(op, args, 2)
        if any(not a.sort.is_bv for a in args):
            raise SortError("concat expects bit-vector arguments")
        sort = bv_sort(args[0].width + args[1].width)
    elif op in BV_INDEXED:
        _arity(op, args, 1)
        if len(params) != BV_INDEXED[op]:
            raise SortError(f"{op} expects {BV_INDEXED[op]} index(es)")
        if not args[0].sort.is_bv:
            raise SortError(f"{op} expects a bit-vector argument")
        k = args[0].width
        if op == "extract":
            hi, lo = params
            if not k > hi >= lo >= 0:
                raise SortError(f"extract {hi} {lo} invalid for width {k}")
            sort = bv_sort(hi - lo + 1)
        elif params[0] < 0:
            raise SortError(f"{op} index must be non-negative")
        elif op in ("zero_extend", "sign_extend"):
            sort = bv_sort(k + params[0])
        elif op == "repeat":
            if params[0] < 1:
                raise SortError("repeat index must be positive")
            sort = bv_sort(k * params[0])
        else:
            sort = bv_sort(k)
    elif op in ("=", "distinct"):
        if len(args) < 2:
            raise SortError(f"{op} expects at least 2 arguments")
        if any(a.sort != args[0].sort for a in args):
            raise SortError(f"{op} expects arguments of one sort, got "
                            + ", ".join(str(a.sort) for a in args))
        sort = BOOL
    elif op == "ite":
        _arity(op, args, 3)
        if args[0].sort != BOOL:
            raise SortError("ite condition must be Bool")
        if args[1].sort != args[2].sort:
            raise SortError(f"ite branches differ in sort: {args[1].sort} vs {args[2].sort}")
        sort = args[1].sort
    elif op == "not":
        _arity(op, args, 1)
        if args[0].sort != BOOL:
            raise SortError("not expects a Bool argument")
        sort = BOOL
    elif op in BOOL_NARY or op == "=>":
        if len(args) < (2 if op == "=>" else 1):
            raise SortError(f"{op} expects more arguments")
        if any(a.sort != BOOL for a in args):
            raise SortError(f"{op} expects Bool arguments")
        sort = BOOL
    elif op in INT_ARITH:
        if not args or (op != "-" and len(args) < 2):
            raise SortError(f"{op} expects more arguments")
        if any(a.sort != INT for a in args):
            raise SortError(f"{op} expects Int arguments")
        sort = INT
    elif op in INT_DIVMOD:
        _arity(op, args, 2)
        if any(a.sort != INT for a in args):
            raise SortError(f"{op} expects Int arguments")
        sort = INT
    elif op in INT_COMPARE:
        if len(args) < 2 or any(a.sort != INT for a in args):
            raise SortError(f"{op} expects at least 2 Int arguments")
        sort = BOOL
    else:
        raise UnsupportedError(op)
    return Term(op, args, params, sort=sort)


# -- traversal --------------------------------------------------------------

def subterms(t: Term) -> Iterator[Term]:
    """Distinct subterms in post-order (children before parents)."""
    seen = set()
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for child in reversed(node.args):
            stack.append((child, False))


def free_vars(t: Term) -> list[Term]:
    """Variable leaves of ``t`` in first-occurrence order."""
    return [s for s in subterms(t) if s.op == "var"]


def size(t: Term) -> int:
    """Tree size (shared subterms counted once per occurrence)."""
    memo: dict[Term, int] = {}
    for s in subterms(t):
        memo[s] = 1 + sum(memo[a] for a in s.args)
    return memo[t]


def transform(t: Term, fn, memo: dict | None = None) -> Term:
    """Bottom-up rewrite: ``fn(node, new_args)`` returns the replacement."""
    memo = {} if memo is None else memo
    for s in subterms(t):
        if s not in memo:
            memo[s] = fn(s, tuple(memo[a] for a in s.args))
    return memo[t]


def rebuild(t: Term, args: tuple) -> Term:
    """``t`` with its children replaced (no re-check for leaves)."""
    if args == t.args:
        return t
    if t.op in ("apply", "call"):
        return Term(t.op, args, payload=t.payload, sort=t.sort)
    return make(t.op, args, t.params)


def conj(terms: Iterable[Term]) -> Term:
    terms = list(terms)
    if not terms:
        return TRUE
    return terms[0] if len(terms) == 1 else make("and", terms)


def disj(terms: Iterable[Term]) -> Term:
    terms = list(terms)
    if not terms:
        return FALSE
    return terms[0] if len(terms) == 1 else make("or", terms)


# -- printing ---------------------------------------------------------------

_SIMPLE_SYMBOL = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][0-9A-Za-z~!@$%^&*_+=<>.?/\-]*$")
RESERVED = frozenset({
    "BINARY", "DECIMAL", "HEXADECIMAL", "NUMERAL", "STRING", "_", "!", "as",
    "let", "exists", "forall", "match", "par",
})


def symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name) and name not in RESERVED:
        return name
    return f"|{name}|"


def bv_literal(value: int, width: int) -> str:
    return "#b" + format(value, f"0{width}b")


def to_smtlib(t: Term) -> str:
    """Canonical SMT-LIB 2 rendering of a term (no let-sharing)."""
    out: list[str] = []
    stack: list = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        op = item.op
        if op == "var":
            out.append(symbol(item.payload))
        elif op == "param":
            out.append(symbol(item.payload[1]))
        elif op == "bv":
            out.append(bv_literal(item.payload, item.width))
        elif op == "int":
            out.append(str(item.payload) if item.payload >= 0 else f"(- {-item.payload})")
        elif op == "bool":
            out.append("true" if item.payload else "false")
        else:
            if op in ("apply", "call"):
                head = symbol(item.payload)
                if not item.args:
                    out.append(head)
                    continue
            elif item.params:
                head = f"(_ {op} {' '.join(map(str, item.params))})"
            else:
                head = op
            out.append("(" + head)
            stack.append(")")
            for a in reversed(item.args):
                stack.append(a)
                stack.append(" ")
    return "".join(out)
