"""SMT-LIB 2 reader for single-query QF_BV scripts.

The reader also accepts the Int/UF fragment it emits itself (translated
QF_UFNIA dumps), so every printed term can be read back.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import TextIO

from .terms import (
    BOOL, BOOL_NARY, BV_INDEXED, BV_LEFT_ASSOC, BV_OPS, FALSE, INT,
    INT_ARITH, INT_COMPARE, INT_DIVMOD, TRUE, Sort, SortError, Term,
    UnsupportedError, apply, bv, bv_literal, bv_sort, call, make, num, rebuild,
    symbol, to_smtlib, transform, var,
)

__all__ = [
    "ParseError", "RecursiveDefinitionError", "Definition", "Script",
    "parse_script", "parse_term", "expand_defines", "print_script",
]


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class RecursiveDefinitionError(RecursionError):
    """A ``define-fun`` refers to itself."""


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple[tuple[str, Sort], ...]
    sort: Sort
    body: Term


@dataclass(frozen=True)
class Script:
    logic: str | None = None
    declarations: tuple[tuple[str, Sort], ...] = ()
    definitions: tuple[Definition, ...] = ()
    assertions: tuple[Term, ...] = ()
    options: dict = field(default_factory=dict)
    # uninterpreted functions of non-zero arity (Int only): (name, arg sorts, result)
    functions: tuple[tuple[str, tuple[Sort, ...], Sort], ...] = ()
    check_sat: bool = False
    get_model: bool = False

    def formula(self) -> Term:
        """Conjunction of all assertions."""
        if not self.assertions:
            return TRUE
        if len(self.assertions) == 1:
            return self.assertions[0]
        return make("and", self.assertions)


# -- lexing ---------------------------------------------------------------

@dataclass
class Token:
    text: str
    line: int
    col: int
    quoted: bool = False  # |symbol| or "string"


class SList(list):
    """A parenthesized s-expression; remembers where it started."""

    def __init__(self, line: int, col: int):
        super().__init__()
        self.line = line
        self.col = col


def _tokens(text: str):
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(k):
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance(1)
        elif ch == ";":
            j = text.find("\n", i)
            advance((n if j < 0 else j) - i)
        elif ch in "()":
            yield Token(ch, line, col)
            advance(1)
        elif ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted symbol", line, col)
            yield Token(text[i + 1:j], line, col, quoted=True)
            advance(j + 1 - i)
        elif ch == '"':
            j = i + 1
            while True:
                j = text.find('"', j)
                if j < 0:
                    raise ParseError("unterminated string literal", line, col)
                if text[j + 1:j + 2] == '"':
                    j += 2
                    continue
                break
            yield Token(text[i:j + 1], line, col, quoted=True)
            advance(j + 1 - i)
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '();|"':
                j += 1
            yield Token(text[i:j], line, col)
            advance(j - i)


def read_sexprs(text: str) -> list:
    """Split text into top-level s-expressions of Tokens and SLists."""
    stack: list[SList] = []
    top: list = []
    for tok in _tokens(text):
        if tok.text == "(" and not tok.quoted:
            stack.append(SList(tok.line, tok.col))
        elif tok.text == ")" and not tok.quoted:
            if not stack:
                raise ParseError("unexpected ')'", tok.line, tok.col)
            done = stack.pop()
            (stack[-1] if stack else top).append(done)
        else:
            (stack[-1] if stack else top).append(tok)
    if stack:
        raise ParseError("unbalanced '(': missing ')'", stack[-1].line, stack[-1].col)
    return top


def _pos(sx) -> tuple[int, int]:
    return (sx.line, sx.col)


def _is_sym(sx, text: str | None = None) -> bool:
    return isinstance(sx, Token) and not sx.quoted and (text is None or sx.text == text)


def _numeral(sx) -> int:
    if not isinstance(sx, Token) or sx.quoted or not sx.text.isdigit():
        raise ParseError("expected a numeral", *_pos(sx))
    return int(sx.text)


def _name(sx) -> str:
    if not isinstance(sx, Token):
        raise ParseError("expected a symbol", *_pos(sx))
    return sx.text


# -- parsing ----------------------------------------------------------------

_UNSUPPORTED_COMMANDS = {
    "push", "pop", "get-unsat-core", "get-assertions", "check-sat-assuming",
    "get-proof", "reset", "reset-assertions", "declare-sort", "define-sort",
    "define-fun-rec", "define-funs-rec", "declare-datatype", "declare-datatypes",
    "get-assignment", "get-unsat-assumptions",
}
_AFTER_CHECK_SAT = {"get-model", "exit"}


class _Parser:
    def __init__(self):
        self.consts: dict[str, Sort] = {}
        self.functions: dict[str, tuple[tuple[Sort, ...], Sort]] = {}
        self.defs: dict[str, tuple[tuple[tuple[str, Sort], ...], Sort]] = {}
        self.definitions: dict[str, Definition] = {}

    # sorts
    def sort(self, sx) -> Sort:
        if _is_sym(sx, "Bool"):
            return BOOL
        if _is_sym(sx, "Int"):
            return INT
        if isinstance(sx, SList) and len(sx) == 3 and _is_sym(sx[0], "_") and _is_sym(sx[1], "BitVec"):
            width = _numeral(sx[2])
            if width < 1:
                raise SortError(f"bit-vector width must be positive at {sx.line}:{sx.col}")
            return bv_sort(width)
        raise UnsupportedError(_render(sx), f"unsupported sort {_render(sx)}")

    # terms
    def term(self, sx, scopes: list[dict[str, Term]]) -> Term:
        if isinstance(sx, Token):
            return self.atom(sx, scopes)
        if not sx:
            raise ParseError("empty application", *_pos(sx))
        head = sx[0]
        if isinstance(head, SList):
            if len(head) >= 2 and _is_sym(head[0], "_"):
                op = _name(head[1])
                params = tuple(_numeral(p) for p in head[2:])
                if op not in BV_INDEXED:
                    raise UnsupportedError(op)
                args = [self.term(a, scopes) for a in sx[1:]]
                return self.checked(sx, op, args, params)
            raise UnsupportedError(_render(head), f"unsupported application head {_render(head)}")
        if head.quoted:
            name = head.text
            return self.application(sx, name, [self.term(a, scopes) for a in sx[1:]])
        op = head.text
        if op == "_":
            if len(sx) == 3 and _name(sx[1]).startswith("bv") and sx[1].text[2:].isdigit():
                width = _numeral(sx[2])
                if width < 1:
                    raise SortError(f"bit-vector width must be positive at {sx.line}:{sx.col}")
                return bv(int(sx[1].text[2:]) % (1 << width), width)
            raise UnsupportedError(_render(sx))
        if op == "let":
            if len(sx) != 3 or not isinstance(sx[1], SList):
                raise ParseError("malformed let", *_pos(sx))
            frame = {}
            for binding in sx[1]:
                if not isinstance(binding, SList) or len(binding) != 2:
                    raise ParseError("malformed let binding", *_pos(sx))
                frame[_name(binding[0])] = self.term(binding[1], scopes)
            return self.term(sx[2], scopes + [frame])
        if op == "!":
            if len(sx) < 2:
                raise ParseError("malformed annotation", *_pos(sx))
            return self.term(sx[1], scopes)
        if op in ("forall", "exists", "as", "match"):
            raise UnsupportedError(op)
        if op == "-" and len(sx) == 2 and isinstance(sx[1], Token) and sx[1].text.isdigit():
            return num(-int(sx[1].text))
        args = [self.term(a, scopes) for a in sx[1:]]
        return self.application(sx, op, args)

    def application(self, sx, op: str, args: list[Term]) -> Term:
        if op in self.defs:
            params, result = self.defs[op]
            if len(args) != len(params) or any(a.sort != p[1] for a, p in zip(args, params)):
                raise SortError(f"bad arguments to {op} at {sx.line}:{sx.col}")
            return call(op, args, result)
        if op in self.functions:
            arg_sorts, result = self.functions[op]
            if tuple(a.sort for a in args) != arg_sorts:
                raise SortError(f"bad arguments to {op} at {sx.line}:{sx.col}")
            return apply(op, args, result)
        if op == "=" and len(args) > 2:
            return make("and", [self.checked(sx, "=", [a, b]) for a, b in zip(args, args[1:])])
        if op == "=>" and len(args) > 2:
            t = args[-1]
            for a in reversed(args[:-1]):
                t = self.checked(sx, "=>", [a, t])
            return t
        if op in BV_LEFT_ASSOC and len(args) > 2:
            t = args[0]
            for a in args[1:]:
                t = self.checked(sx, op, [t, a])
            return t
        if op in BV_OPS or op in BOOL_NARY or op in INT_ARITH or op in INT_DIVMOD \
                or op in INT_COMPARE or op in ("=", "distinct", "ite", "not", "=>"):
            return self.checked(sx, op, args)
        raise UnsupportedError(op)

    def checked(self, sx, op, args, params=()) -> Term:
        try:
            return make(op, args, params)
        except SortError as e:
            raise SortError(f"{e} at {sx.line}:{sx.col}") from None

    def atom(self, tok: Token, scopes) -> Term:
        text = tok.text
        if not tok.quoted:
            if text.isdigit():
                return num(int(text))
            if text.startswith("#b"):
                digits = text[2:]
                if not digits or set(digits) - {"0", "1"}:
                    raise ParseError(f"bad binary literal {text}", tok.line, tok.col)
                return bv(int(digits, 2), len(digits))
            if text.startswith("#x"):
                digits = text[2:]
                try:
                    return bv(int(digits, 16), 4 * len(digits))
                except ValueError:
                    raise ParseError(f"bad hex literal {text}", tok.line, tok.col) from None
            if text == "true":
                return TRUE
            if text == "false":
                return FALSE
            if text.startswith('"'):
                raise UnsupportedError(text, "string literals are not supported")
        for frame in reversed(scopes):
            if text in frame:
                return frame[text]
        if text in self.consts:
            return var(text, self.consts[text])
        if text in self.defs:
            params, result = self.defs[text]
            if params:
                raise SortError(f"{text} expects {len(params)} argument(s) at {tok.line}:{tok.col}")
            return call(text, (), result)
        raise SortError(f"undeclared symbol {text} at {tok.line}:{tok.col}")


def _render(sx) -> str:
    if isinstance(sx, Token):
        return symbol(sx.text) if sx.quoted and not sx.text.startswith('"') else sx.text
    return "(" + " ".join(_render(x) for x in sx) + ")"


def _read_text(source) -> str:
    if isinstance(source, str):
        return source
    if isinstance(source, bytes):
        return source.decode("utf-8")
    return source.read()


def parse_script(source: str | TextIO) -> Script:
    """Parse and sort-check a single-query SMT-LIB 2 script.

    ``let`` is inlined and ``:named`` (and other) annotations are dropped.
    ``define-fun`` applications stay as ``call`` nodes; see
    :func:`expand_defines`.
    """
    p = _Parser()
    logic = None
    decls: list[tuple[str, Sort]] = []
    assertions: list[Term] = []
    options: dict[str, str] = {}
    check_sat = get_model = False
    for cmd in read_sexprs(_read_text(source)):
        if not isinstance(cmd, SList) or not cmd or not _is_sym(cmd[0]):
            raise ParseError("expected a command", *_pos(cmd))
        name = cmd[0].text
        if check_sat and name not in _AFTER_CHECK_SAT:
            raise UnsupportedError(name, f"command {name} after check-sat is not supported")
        if name in _UNSUPPORTED_COMMANDS:
            raise UnsupportedError(name, f"unsupported command: {name}")
        if name == "set-logic":
            logic = _name(cmd[1])
        elif name in ("set-info", "set-option"):
            if len(cmd) < 2:
                raise ParseError(f"malformed {name}", *_pos(cmd))
            if name == "set-option":
                options[_name(cmd[1])] = " ".join(_render(x) for x in cmd[2:])
        elif name in ("declare-const", "declare-fun"):
            ident = _name(cmd[1])
            if name == "declare-const":
                if len(cmd) != 3:
                    raise ParseError("malformed declare-const", *_pos(cmd))
                arg_sorts, result = (), p.sort(cmd[2])
            else:
                if len(cmd) != 4 or not isinstance(cmd[2], SList):
                    raise ParseError("malformed declare-fun", *_pos(cmd))
                arg_sorts, result = tuple(p.sort(s) for s in cmd[2]), p.sort(cmd[3])
            if ident in p.consts or ident in p.functions or ident in p.defs:
                raise SortError(f"symbol {ident} declared twice at {cmd.line}:{cmd.col}")
            if not arg_sorts:
                p.consts[ident] = result
                decls.append((ident, result))
            elif all(s == INT for s in arg_sorts) and result == INT:
                p.functions[ident] = (arg_sorts, result)
            else:
                raise UnsupportedError(ident, f"uninterpreted function {ident} over non-Int sorts")
        elif name == "define-fun":
            if len(cmd) != 5 or not isinstance(cmd[2], SList):
                raise ParseError("malformed define-fun", *_pos(cmd))
            ident = _name(cmd[1])
            params = []
            for pdecl in cmd[2]:
                if not isinstance(pdecl, SList) or len(pdecl) != 2:
                    raise ParseError("malformed parameter list", *_pos(cmd))
                params.append((_name(pdecl[0]), p.sort(pdecl[1])))
            result = p.sort(cmd[3])
            # registered before the body so self-reference parses and is caught on expansion
            p.defs[ident] = (tuple(params), result)
            frame = {pname: Term("param", payload=(i, pname), sort=s)
                     for i, (pname, s) in enumerate(params)}
            body = p.term(cmd[4], [frame])
            if body.sort != result:
                raise SortError(f"body of {ident} has sort {body.sort}, expected {result}")
            p.definitions[ident] = Definition(ident, tuple(params), result, body)
        elif name == "assert":
            if len(cmd) != 2:
                raise ParseError("malformed assert", *_pos(cmd))
            t = p.term(cmd[1], [])
            if t.sort != BOOL:
                raise SortError(f"assertion must have sort Bool, got {t.sort} at {cmd.line}:{cmd.col}")
            assertions.append(t)
        elif name == "check-sat":
            check_sat = True
        elif name == "get-model":
            get_model = True
        elif name == "exit":
            break
        else:
            raise UnsupportedError(name, f"unsupported command: {name}")
    return Script(
        logic=logic,
        declarations=tuple(decls),
        definitions=tuple(p.definitions.values()),
        assertions=tuple(assertions),
        options=options,
        functions=tuple((n, a, r) for n, (a, r) in p.functions.items()),
        check_sat=check_sat,
        get_model=get_model,
    )


def parse_term(text: str, declarations=(), functions=()) -> Term:
    """Parse one term against the given constant and function declarations."""
    p = _Parser()
    p.consts.update(declarations)
    for name, arg_sorts, result in functions:
        p.functions[name] = (tuple(arg_sorts), result)
    sxs = read_sexprs(text)
    if len(sxs) != 1:
        raise ParseError(f"expected exactly one term, found {len(sxs)}")
    return p.term(sxs[0], [])


def expand_defines(s: Script) -> Script:
    """Beta-expand every ``define-fun`` application.

    After let-inlining no binders remain inside terms and actual arguments
    only mention global constants, so plain substitution cannot capture.
    """
    defs = {d.name: d for d in s.definitions}
    expanded: dict[str, Term] = {}
    active: list[str] = []

    def body_of(name: str) -> Term:
        if name in expanded:
            return expanded[name]
        if name in active:
            cycle = " -> ".join(active[active.index(name):] + [name])
            raise RecursiveDefinitionError(f"recursive definition: {cycle}")
        active.append(name)
        expanded[name] = transform(defs[name].body, expand_node)
        active.pop()
        return expanded[name]

    def expand_node(node: Term, args: tuple) -> Term:
        if node.op == "call":
            body = body_of(node.payload)
            if not args:
                return body
            return transform(body, lambda n, a: args[n.payload[0]] if n.op == "param"
                             else rebuild(n, a))
        return rebuild(node, args)

    assertions = tuple(transform(a, expand_node) for a in s.assertions)
    return Script(
        logic=s.logic, declarations=s.declarations, definitions=(),
        assertions=assertions, options=dict(s.options), functions=s.functions,
        check_sat=s.check_sat, get_model=s.get_model,
    )


def print_script(logic: str, declarations, assertions, functions=(),
                 comments: dict[int, str] | None = None,
                 check_sat: bool = True) -> str:
    """Render a self-contained script; byte-stable for equal inputs.

    ``comments`` maps an assertion index to a comment line printed before it.
    """
    buf = io.StringIO()
    buf.write(f"(set-logic {logic})\n")
    for name, sort in declarations:
        buf.write(f"(declare-fun {symbol(name)} () {sort})\n")
    for name, arg_sorts, result in functions:
        buf.write(f"(declare-fun {symbol(name)} ({' '.join(map(str, arg_sorts))}) {result})\n")
    comments = comments or {}
    for i, t in enumerate(assertions):
        if i in comments:
            buf.write(f"; {comments[i]}\n")
        buf.write(f"(assert {to_smtlib(t)})\n")
    if check_sat:
        buf.write("(check-sat)\n")
    return buf.getvalue()


def model_block(values) -> str:
    """``(model (define-fun x () (_ BitVec k) #b...) ...)`` for (name, sort, value)."""
    lines = ["(model"]
    for name, sort, value in values:
        if sort.is_bv:
            lit = bv_literal(value, sort.width)
        elif sort == BOOL:
            lit = "true" if value else "false"
        else:
            lit = str(value) if value >= 0 else f"(- {-value})"
        lines.append(f"  (define-fun {symbol(name)} () {sort} {lit})")
    lines.append(")")
    return "\n".join(lines)
