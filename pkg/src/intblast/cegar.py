"""The refinement loop.

The translated formula goes to an integer solver.  A model is genuine when
every abstracted application agrees with the true bit-vector operation on
its argument values; otherwise lemmas are added and the solver is asked
again.  Between the two, the original formula can be checked by a
bit-vector solver with the non-abstracted variables pinned to the integer
model, which either finds a real model or yields a blocking clause from its
unsat core.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

from .frontend import Script, expand_defines, print_script
from .lemmas import (
    EmptyCoreError, Lemma, Tier, base_lemmas, core_lemma, full_expansion,
    instance_lemma,
)
from .oracle import (
    BudgetExceeded, Evaluator, IncompleteModelError, brute_force_sat, evaluate,
    true_bv_function,
)
from .preprocess import eliminate_derived_ops
from .solver import BackendError, SolverSession
from .terms import BOOL, Term, boolean, make, subterms, var
from .translate import (
    ABSTRACTED, AbstractedApp, RangeError, TranslationMap, to_bv,
    translate_formula,
)

log = logging.getLogger(__name__)


class InternalError(RuntimeError):
    """An invariant of the procedure was violated."""


@dataclass
class Config:
    nia_solver: list[str] | None = None
    bv_solver: list[str] | None = None
    underapprox_enabled: bool = True
    escalation_threshold: int = 8
    max_iterations: int = 10000
    timeout_ms: int | None = None
    expand_on_unknown: bool = False
    underapprox_after_refine: bool = False
    dump_lemmas: str | None = None
    record_models: bool = False

    def __post_init__(self):
        if self.escalation_threshold < 1:
            raise ValueError("escalation threshold must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.timeout_ms is not None and self.timeout_ms < 0:
            raise ValueError("timeout must be non-negative")


@dataclass
class Model:
    """Integer-level model: variable values and abstracted application values."""

    var_values: dict[str, int | bool] = field(default_factory=dict)
    app_values: dict[Term, int] = field(default_factory=dict)

    def fingerprint(self):
        return (tuple(sorted(self.var_values.items())),
                tuple((repr(t), v) for t, v in self.app_values.items()))


@dataclass
class Stats:
    iterations: int = 0
    lemmas: dict[str, int] = field(default_factory=lambda: {
        "base": 0, "instance": 0, "expansion": 0, "core": 0})
    underapprox_calls: int = 0
    underapprox_sat: int = 0
    sat_branch: str | None = None
    repeated_models: int = 0
    verdict: str = "unknown"
    time_ms: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "iterations": self.iterations,
            "lemmas": dict(self.lemmas),
            "underapprox_calls": self.underapprox_calls,
            "verdict": self.verdict,
            "time_ms": self.time_ms,
            "sat_branch": self.sat_branch,
        })


_TIER_KEY = {Tier.BASE: "base", Tier.INSTANCE: "instance",
             Tier.FULL_EXPANSION: "expansion", Tier.UNDERAPPROX_CORE: "core"}


@dataclass
class SolveResult:
    verdict: str
    # (name, sort, value) in declaration order; present iff verdict is sat
    model: list[tuple] | None = None
    stats: Stats = field(default_factory=Stats)
    error: str | None = None
    models: list[Model] = field(default_factory=list)

    def assignment(self) -> dict:
        return {name: value for name, _, value in self.model or ()}


@dataclass
class RefineState:
    base_done: bool = False
    instances: int = 0
    expanded: bool = False


@dataclass
class UnderApproxResult:
    verdict: str
    model: dict | None = None
    core: list[tuple[str, int, int]] = field(default_factory=list)
    assumptions: list[tuple[str, int, int]] = field(default_factory=list)


# -- pieces of the loop -----------------------------------------------------

def extract_model(session: SolverSession, tm: TranslationMap) -> Model:
    var_terms = [tm.translated_var(name) for name in tm.var_map]
    app_terms = [app.app_term for app in tm.app_index]
    values = session.get_values(var_terms + app_terms)
    return Model(
        var_values={t.payload: values[t] for t in var_terms},
        app_values={t: values[t] for t in app_terms},
    )


def _arg_values(app: AbstractedApp, mu: Model) -> tuple[int, int]:
    return tuple(evaluate(a, mu.var_values, apps=mu.app_values) for a in app.arg_terms)


def check_spurious(mu: Model, tm: TranslationMap) -> list[AbstractedApp]:
    """Applications whose model value differs from the true operation."""
    bad = []
    for app in tm.app_index:
        if app.app_term not in mu.app_values:
            raise IncompleteModelError(f"model has no value for {app.app_term!r}")
        a, b = _arg_values(app, mu)
        if mu.app_values[app.app_term] != true_bv_function(app.op, app.width)(a, b):
            bad.append(app)
    return bad


def _falsified(lemma: Lemma, mu: Model) -> bool:
    try:
        return evaluate(lemma.formula, mu.var_values, apps=mu.app_values) is False
    except IncompleteModelError:
        # mentions applications outside the model (e.g. swapped arguments)
        return False


def refine(inconsistent, mu: Model, history: dict, threshold: int = 8) -> list[Lemma]:
    """Next lemmas for each inconsistent application, escalating per app.

    ``history`` maps application terms to :class:`RefineState` and is
    updated in place.
    """
    lemmas: list[Lemma] = []
    for app in inconsistent:
        state = history.setdefault(app.app_term, RefineState())
        if state.expanded:
            raise InternalError(f"{app.app_term!r} is inconsistent after full expansion")
        if not state.base_done:
            batch = base_lemmas(app)
            state.base_done = True
            lemmas.extend(batch)
            if not any(_falsified(lemma, mu) for lemma in batch):
                lemmas.append(instance_lemma(app, *_arg_values(app, mu)))
                state.instances += 1
        elif state.instances < threshold:
            lemmas.append(instance_lemma(app, *_arg_values(app, mu)))
            state.instances += 1
        else:
            lemmas.append(full_expansion(app))
            state.expanded = True
    return lemmas


def abstracted_vars(phi: Term) -> set[str]:
    """Names of variables occurring inside arguments of bvand/bvshl/bvlshr."""
    inside: set[str] = set()
    for s in subterms(phi):
        if s.op in ABSTRACTED:
            for a in s.args:
                inside.update(v.payload for v in subterms(a) if v.op == "var")
    return inside


def _pinned(name: str, sort, value) -> Term:
    x = var(name, sort)
    if sort == BOOL:
        return make("=", [x, boolean(value)])
    return make("=", [x, to_bv(value, sort.width)])


def under_approx_check(phi: Term, mu: Model, tm: TranslationMap,
                       client: SolverSession, declarations,
                       original: Term | None = None,
                       timeout_ms: int | None = None) -> UnderApproxResult:
    """Check ``phi`` with non-abstracted variables pinned to ``mu``.

    ``phi`` is the preprocessed formula already asserted in ``client``;
    a sat answer is only accepted after evaluating ``original`` (default
    ``phi``) under the returned model.
    """
    excluded = abstracted_vars(phi)
    occurring = {v.payload for v in subterms(phi) if v.op == "var"}
    sorts = dict(declarations)
    assumptions = []
    for name, sort in declarations:
        if name in occurring and name not in excluded:
            int_name, width = tm.var_map[name]
            value = mu.var_values[int_name]
            assumptions.append((name, value, width))
    labelled = [(name, _pinned(name, sorts[name], value)) for name, value, _ in assumptions]
    verdict, core_names = client.check_assuming(labelled, timeout_ms)
    if verdict == "sat":
        bv_vars = [var(name, sort) for name, sort in declarations if name in occurring]
        values = client.get_values(bv_vars)
        model = {name: 0 if sort != BOOL else False for name, sort in declarations}
        model.update({v.payload: values[v] for v in bv_vars})
        if evaluate(original if original is not None else phi, model) is not True:
            log.warning("bit-vector solver model does not satisfy the formula; ignoring it")
            return UnderApproxResult("unknown", assumptions=assumptions)
        return UnderApproxResult("sat", model=model, assumptions=assumptions)
    if verdict == "unsat":
        in_core = set(core_names)
        core = [a for a in assumptions if a[0] in in_core]
        return UnderApproxResult("unsat", core=core, assumptions=assumptions)
    return UnderApproxResult("unknown", assumptions=assumptions)


def _model_list(declarations, assignment) -> list[tuple]:
    return [(name, sort, assignment[name]) for name, sort in declarations]


# -- the loop ---------------------------------------------------------------

class _Run:
    def __init__(self, script: Script, cfg: Config):
        self.cfg = cfg
        self.script = expand_defines(script)
        self.declarations = list(self.script.declarations)
        self.original = self.script.formula()
        self.preprocessed = eliminate_derived_ops(self.original)
        self.phi_int, self.tm = translate_formula(self.preprocessed, self.declarations)
        self.stats = Stats()
        self.history: dict[Term, RefineState] = {}
        self.models: list[Model] = []
        self.started = time.monotonic()
        self.nia: SolverSession | None = None
        self.bv: SolverSession | None = None
        self.bv_disabled = not (cfg.underapprox_enabled and cfg.bv_solver)
        self.bv_exhausted = False
        self.lemma_log = open(cfg.dump_lemmas, "w") if cfg.dump_lemmas else None
        self.verify = Evaluator(self.original)

    def remaining_ms(self) -> int | None:
        if self.cfg.timeout_ms is None:
            return None
        return self.cfg.timeout_ms - int((time.monotonic() - self.started) * 1000)

    def out_of_time(self) -> bool:
        left = self.remaining_ms()
        return left is not None and left <= 0

    def add_lemma(self, lemma: Lemma):
        self.nia.assert_term(lemma.formula)
        self.stats.lemmas[_TIER_KEY[lemma.tier]] += 1
        if self.lemma_log is not None:
            self.lemma_log.write(f"; {lemma.describe()}\n(assert {lemma.formula!r})\n")

    def result(self, verdict: str, assignment=None, error=None, branch=None) -> SolveResult:
        self.stats.verdict = verdict
        self.stats.sat_branch = branch
        self.stats.time_ms = int((time.monotonic() - self.started) * 1000)
        model = _model_list(self.declarations, assignment) if assignment is not None else None
        return SolveResult(verdict, model, self.stats, error,
                           self.models if self.cfg.record_models else [])

    def genuine_assignment(self, mu: Model) -> dict:
        assignment = {}
        for name, sort in self.declarations:
            int_name, width = self.tm.var_map[name]
            value = mu.var_values[int_name]
            if width:
                try:
                    to_bv(value, width)
                except RangeError as e:
                    raise BackendError(f"model violates the asserted range of {name}: {e}") from e
            assignment[name] = value
        if self.verify(assignment) is not True:
            raise InternalError("reconstructed model does not satisfy the formula")
        return assignment

    def start_bv(self):
        try:
            self.bv = SolverSession(self.cfg.bv_solver, "QF_BV", unsat_assumptions=True).start()
            for name, sort in self.declarations:
                self.bv.declare(name, sort)
            self.bv.assert_term(self.preprocessed)
        except BackendError as e:
            log.warning("under-approximation disabled: %s", e)
            if self.bv is not None:
                self.bv.close()
            self.bv = None
            self.bv_disabled = True

    def under_approx(self, mu: Model):
        """Run the bit-vector check; returns a sat assignment or None."""
        if self.bv_disabled or self.bv_exhausted or self.out_of_time():
            return None
        if self.bv is None:
            self.start_bv()
            if self.bv is None:
                return None
        self.stats.underapprox_calls += 1
        try:
            r = under_approx_check(self.preprocessed, mu, self.tm, self.bv,
                                   self.declarations, self.original, self.remaining_ms())
        except BackendError as e:
            log.warning("under-approximation check failed, disabling it: %s", e)
            self.bv.close()
            self.bv_disabled = True
            return None
        if not self.bv.alive:
            self.bv_disabled = True
        if r.verdict == "sat":
            self.stats.underapprox_sat += 1
            return r.model
        if r.verdict == "unsat":
            if not r.assumptions:
                # nothing was pinned; asking again cannot teach anything new
                self.bv_exhausted = True
                return None
            try:
                lemma = core_lemma(r.core, self.tm)
            except EmptyCoreError:
                lemma = core_lemma(r.assumptions, self.tm)
            self.add_lemma(lemma)
        return None

    def run(self) -> SolveResult:
        cfg = self.cfg
        if not cfg.nia_solver:
            raise ValueError("no integer solver configured")
        self.nia = SolverSession(cfg.nia_solver, "QF_UFNIA").start()
        for r in self.tm.range_constraints:
            self.nia.assert_term(r)
        self.nia.assert_term(self.phi_int)
        retried = False
        previous = None
        for iteration in range(1, cfg.max_iterations + 1):
            if self.out_of_time():
                return self.result("unknown")
            self.stats.iterations = iteration
            verdict = self.nia.check(self.remaining_ms())
            if verdict == "unsat":
                return self.result("unsat")
            if verdict == "unknown":
                if cfg.expand_on_unknown and not retried and self.nia.alive:
                    retried = True
                    for app in self.tm.app_index:
                        state = self.history.setdefault(app.app_term, RefineState())
                        if not state.expanded:
                            self.add_lemma(full_expansion(app))
                            state.expanded = True
                    continue
                return self.result("unknown")
            mu = extract_model(self.nia, self.tm)
            fp = mu.fingerprint()
            if fp == previous:
                self.stats.repeated_models += 1
            previous = fp
            if cfg.record_models:
                self.models.append(mu)
            inconsistent = check_spurious(mu, self.tm)
            if not inconsistent:
                return self.result("sat", self.genuine_assignment(mu), branch="abstraction")
            if not cfg.underapprox_after_refine:
                found = self.under_approx(mu)
                if found is not None:
                    return self.result("sat", found, branch="underapprox")
            for lemma in refine(inconsistent, mu, self.history, cfg.escalation_threshold):
                self.add_lemma(lemma)
            if cfg.underapprox_after_refine:
                found = self.under_approx(mu)
                if found is not None:
                    return self.result("sat", found, branch="underapprox")
        return self.result("unknown")

    def close(self):
        for session in (self.nia, self.bv):
            if session is not None:
                session.close()
        if self.lemma_log is not None:
            self.lemma_log.close()


def solve(script: Script, cfg: Config) -> SolveResult:
    """Decide the script's assertions.

    Backend failures do not raise: they yield ``unknown`` with the
    diagnostic in ``SolveResult.error``.
    """
    run = _Run(script, cfg)
    try:
        return run.run()
    except BackendError as e:
        log.error("backend error: %s", e)
        return run.result("unknown", error=str(e))
    finally:
        run.close()


def solve_with_oracle(script: Script, budget: int | None = None) -> SolveResult:
    """Brute-force decision; ``unknown`` when the budget is exceeded."""
    started = time.monotonic()
    script = expand_defines(script)
    stats = Stats()
    extra = [var(name, sort) for name, sort in script.declarations]
    try:
        if budget is None:
            r = brute_force_sat(script.formula(), extra_vars=extra)
        else:
            r = brute_force_sat(script.formula(), budget, extra_vars=extra)
    except BudgetExceeded as e:
        stats.time_ms = int((time.monotonic() - started) * 1000)
        return SolveResult("unknown", stats=stats, error=str(e))
    stats.verdict = r.verdict
    stats.sat_branch = "oracle" if r.verdict == "sat" else None
    stats.time_ms = int((time.monotonic() - started) * 1000)
    model = _model_list(script.declarations, r.assignment) if r.verdict == "sat" else None
    return SolveResult(r.verdict, model, stats)


# -- dumps ------------------------------------------------------------------

def preprocessed_text(script: Script) -> str:
    """The preprocessed formula as a standalone QF_BV script."""
    script = expand_defines(script)
    assertions = [eliminate_derived_ops(a) for a in script.assertions]
    return print_script("QF_BV", script.declarations, assertions)


def translation_text(script: Script) -> str:
    """The integer translation as a standalone QF_UFNIA script.

    Ranges and the formula come first; the full expansion of every
    abstracted application follows, so the dump alone is equisatisfiable
    with the input.
    """
    script = expand_defines(script)
    pre = eliminate_derived_ops(script.formula())
    phi_int, tm = translate_formula(pre, script.declarations)
    assertions = list(tm.range_constraints) + [phi_int]
    comments = {0: "range constraints", len(tm.range_constraints): "translated formula"}
    if tm.app_index:
        comments[len(assertions)] = "full expansions of abstracted applications"
        assertions += [full_expansion(app).formula for app in tm.app_index]
    return print_script("QF_UFNIA", tm.declarations(), assertions, tm.functions(), comments)

