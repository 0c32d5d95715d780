"""Child-process client for SMT-LIB 2 solvers.

The session turns on ``:print-success`` so that every command has exactly
one response, and keeps strict request/response alternation.  Any protocol
failure kills the child and leaves the session dead.
"""

from __future__ import annotations

import logging
import subprocess
import threading

from .frontend import ParseError, SList, Token, read_sexprs
from .terms import BOOL, INT, Sort, Term, make, subterms, symbol, to_smtlib, var

log = logging.getLogger(__name__)

IDLE, AWAITING, DEAD = "idle", "awaiting-response", "dead"


class BackendError(Exception):
    """Malformed or failed interaction with an external solver."""


class SpawnError(BackendError):
    """The solver process could not be started."""


def _balance(line: str) -> int:
    depth = 0
    in_quote = in_string = False
    for ch in line:
        if in_string:
            in_string = ch != '"'
        elif in_quote:
            in_quote = ch != "|"
        elif ch == '"':
            in_string = True
        elif ch == "|":
            in_quote = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
    return depth


def _parse_value(sx):
    if isinstance(sx, Token):
        text = sx.text
        if text.isdigit():
            return int(text)
        if text.startswith("#b"):
            return int(text[2:], 2)
        if text.startswith("#x"):
            return int(text[2:], 16)
        if text == "true":
            return True
        if text == "false":
            return False
    elif isinstance(sx, SList):
        if len(sx) == 2 and isinstance(sx[0], Token) and sx[0].text == "-":
            raise BackendError(f"negative value {_show(sx)} violates the asserted ranges")
        if (len(sx) == 3 and isinstance(sx[0], Token) and sx[0].text == "_"
                and sx[1].text.startswith("bv") and sx[1].text[2:].isdigit()):
            return int(sx[1].text[2:])
    raise BackendError(f"cannot interpret value {_show(sx)}")


def _show(sx) -> str:
    if isinstance(sx, Token):
        return sx.text
    return "(" + " ".join(_show(x) for x in sx) + ")"


class SolverSession:
    """One running solver process speaking SMT-LIB 2 on stdin/stdout."""

    def __init__(self, command, logic: str, unsat_assumptions: bool = False):
        self.command = list(command)
        self.logic = logic
        self.unsat_assumptions = unsat_assumptions
        self.state = DEAD
        self.pending_timeout: int | None = None
        self.declared: dict[str, tuple] = {}
        self._proc: subprocess.Popen | None = None
        self._indicators = 0
        self._timed_out = False

    # -- lifecycle --------------------------------------------------------

    def start(self) -> "SolverSession":
        if not self.command:
            raise SpawnError("empty solver command")
        try:
            self._proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=None, text=True, bufsize=1,
            )
        except OSError as e:
            raise SpawnError(f"cannot start {self.command[0]}: {e}") from e
        self.state = IDLE
        self._expect_success("(set-option :print-success true)")
        self._expect_success("(set-option :produce-models true)")
        if self.unsat_assumptions:
            self._expect_success("(set-option :produce-unsat-assumptions true)")
        self._expect_success(f"(set-logic {self.logic})")
        return self

    def close(self):
        if self._proc is None:
            return
        if self.state == IDLE:
            try:
                self._proc.stdin.write("(exit)\n")
                self._proc.stdin.flush()
                self._proc.wait(timeout=1)
            except (OSError, subprocess.TimeoutExpired):
                pass
        self._kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _kill(self):
        self.state = DEAD
        if self._proc is not None and self._proc.poll() is None:
            self._proc.kill()
        if self._proc is not None:
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                pass
            for stream in (self._proc.stdin, self._proc.stdout):
                try:
                    stream.close()
                except OSError:
                    pass

    @property
    def alive(self) -> bool:
        return self.state != DEAD

    # -- raw protocol -----------------------------------------------------

    def _fail(self, message: str):
        self._kill()
        raise BackendError(message)

    def _request(self, command: str, timeout_ms: int | None = None) -> str:
        if self.state != IDLE:
            raise BackendError(f"session is {self.state}")
        self.state = AWAITING
        log.debug("-> %s", command)
        watchdog = None
        self._timed_out = False
        if timeout_ms is not None:
            self.pending_timeout = timeout_ms

            def expire():
                self._timed_out = True
                self._proc.kill()

            watchdog = threading.Timer(max(timeout_ms, 0) / 1000.0, expire)
            watchdog.daemon = True
            watchdog.start()
        try:
            try:
                self._proc.stdin.write(command + "\n")
                self._proc.stdin.flush()
            except OSError as e:
                self._fail(f"solver stdin closed: {e}")
            response = self._read_response()
        finally:
            if watchdog is not None:
                watchdog.cancel()
            self.pending_timeout = None
        log.debug("<- %s", response)
        if response is None:
            if self._timed_out:
                self._kill()
                raise TimeoutError("solver timed out")
            self._fail(f"solver exited while answering {command.split()[0]}")
        if response.startswith("(error"):
            self._fail(f"solver error on {command[:60]}: {response}")
        self.state = IDLE
        return response

    def _read_response(self) -> str | None:
        lines: list[str] = []
        depth = 0
        while True:
            line = self._proc.stdout.readline()
            if not line:
                return None
            stripped = line.strip()
            if not lines and (not stripped or stripped.startswith(";")):
                continue
            lines.append(stripped)
            depth += _balance(stripped)
            if depth <= 0:
                return " ".join(lines)

    def _expect_success(self, command: str):
        response = self._request(command)
        if response != "success":
            self._fail(f"solver rejected {command}: {response}")

    # -- commands ---------------------------------------------------------

    def declare(self, name: str, sort: Sort, arg_sorts: tuple = ()):
        """Declare a symbol unless already declared."""
        if name in self.declared:
            if self.declared[name] != (arg_sorts, sort):
                raise BackendError(f"symbol {name} redeclared with a different signature")
            return
        args = " ".join(map(str, arg_sorts))
        self._expect_success(f"(declare-fun {symbol(name)} ({args}) {sort})")
        self.declared[name] = (arg_sorts, sort)

    def _declare_symbols(self, t: Term):
        for s in subterms(t):
            if s.op == "var":
                self.declare(s.payload, s.sort)
            elif s.op == "apply":
                self.declare(s.payload, s.sort, tuple(a.sort for a in s.args))

    def assert_term(self, t: Term):
        if t.sort != BOOL:
            raise BackendError("only Bool terms can be asserted")
        if self.state == DEAD:
            raise BackendError("session is dead")
        self._declare_symbols(t)
        self._expect_success(f"(assert {to_smtlib(t)})")

    def _verdict(self, command: str, timeout_ms) -> str:
        try:
            response = self._request(command, timeout_ms)
        except TimeoutError:
            return "unknown"
        if response not in ("sat", "unsat", "unknown"):
            self._fail(f"unexpected reply to {command}: {response}")
        return response

    def check(self, timeout_ms: int | None = None) -> str:
        """``sat``, ``unsat`` or ``unknown``; a timeout kills the child."""
        return self._verdict("(check-sat)", timeout_ms)

    def check_assuming(self, assumptions, timeout_ms: int | None = None):
        """Check under labelled Bool assumptions.

        Each assumption gets a fresh indicator ``b`` with ``b => term``
        asserted, and ``b`` is what the solver assumes.  Returns
        ``(verdict, core)``; ``core`` lists the labels in the unsat core.
        """
        if not assumptions:
            return self.check(timeout_ms), []
        by_indicator = {}
        for label, term in assumptions:
            name = self._fresh_indicator()
            self.declare(name, BOOL)
            self.assert_term(make("=>", [var(name, BOOL), term]))
            by_indicator[name] = label
        names = " ".join(symbol(n) for n in by_indicator)
        verdict = self._verdict(f"(check-sat-assuming ({names}))", timeout_ms)
        if verdict != "unsat":
            return verdict, []
        response = self._request("(get-unsat-assumptions)")
        try:
            sxs = read_sexprs(response)
        except ParseError as e:
            self._fail(f"unparsable unsat assumptions: {e}")
        if len(sxs) != 1 or not isinstance(sxs[0], SList):
            self._fail(f"unparsable unsat assumptions: {response}")
        core = []
        for item in sxs[0]:
            if not isinstance(item, Token) or item.text not in by_indicator:
                self._fail(f"unsat core mentions unknown assumption {_show(item)}")
            core.append(by_indicator[item.text])
        return verdict, core

    def _fresh_indicator(self) -> str:
        while True:
            name = f"assume!{self._indicators}"
            self._indicators += 1
            if name not in self.declared:
                return name

    def get_values(self, terms) -> dict[Term, int | bool]:
        """Values of ``terms`` in the current model (after a ``sat`` check)."""
        terms = list(terms)
        if not terms:
            return {}
        for t in terms:
            self._declare_symbols(t)
        response = self._request("(get-value (" + " ".join(to_smtlib(t) for t in terms) + "))")
        try:
            sxs = read_sexprs(response)
        except ParseError as e:
            self._fail(f"unparsable get-value reply: {e}")
        if len(sxs) != 1 or not isinstance(sxs[0], SList) or len(sxs[0]) != len(terms):
            self._fail(f"get-value reply has the wrong shape: {response[:200]}")
        values = {}
        for t, pair in zip(terms, sxs[0]):
            if not isinstance(pair, SList) or len(pair) != 2:
                self._fail(f"get-value reply has the wrong shape: {response[:200]}")
            try:
                value = _parse_value(pair[1])
            except BackendError:
                self._kill()
                raise
            if t.sort == BOOL and not isinstance(value, bool):
                self._fail(f"expected a Boolean for {t!r}")
            if t.sort == INT and isinstance(value, bool):
                self._fail(f"expected an integer for {t!r}")
            values[t] = value
        return values


def start(command, logic: str, unsat_assumptions: bool = False) -> SolverSession:
    """Spawn ``command`` and configure it for ``logic``."""
    return SolverSession(command, logic, unsat_assumptions).start()
