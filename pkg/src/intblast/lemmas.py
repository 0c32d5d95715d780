"""Refinement lemmas for abstracted ``bvand``/``bvshl``/``bvlshr`` applications.

Lemmas come in tiers, from cheap algebraic facts to the full definition of
the operation.  All of them are instantiated at an application's argument
terms; none are quantified.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .oracle import true_bv_function
from .terms import Term, apply, boolean, disj, make, num
from .translate import AbstractedApp, TranslationMap


class Tier(enum.IntEnum):
    BASE = 1
    INSTANCE = 2
    FULL_EXPANSION = 3
    UNDERAPPROX_CORE = 4


class EmptyCoreError(ValueError):
    """An under-approximation core without assumptions."""


@dataclass(frozen=True)
class Lemma:
    formula: Term
    tier: Tier
    source: AbstractedApp | None = None  # None for global lemmas

    def describe(self) -> str:
        where = "global" if self.source is None else repr(self.source.app_term)
        return f"tier {int(self.tier)} ({self.tier.name.lower()}) from {where}"


def _eq(a, b):
    return make("=", [a, b])


def _implies(a, b):
    return make("=>", [a, b])


def base_lemmas(app: AbstractedApp) -> list[Lemma]:
    a, b = app.arg_terms
    f = app.app_term
    k = app.width
    zero, ones = num(0), num((1 << k) - 1)
    if app.op == "and":
        swapped = apply(app.symbol, (b, a))
        facts = [
            _eq(f, swapped),
            make("<=", [f, a]),
            make("<=", [f, b]),
            _implies(_eq(a, zero), _eq(f, zero)),
            _implies(_eq(b, zero), _eq(f, zero)),
            _implies(_eq(a, ones), _eq(f, b)),
            _implies(_eq(b, ones), _eq(f, a)),
            _implies(_eq(a, b), _eq(f, a)),
            make("<=", [make("-", [make("+", [a, b]), f]), ones]),
        ]
    elif app.op == "shl":
        facts = [
            _implies(_eq(b, zero), _eq(f, a)),
            _implies(make(">=", [b, num(k)]), _eq(f, zero)),
            _implies(_eq(a, zero), _eq(f, zero)),
        ]
    elif app.op == "lshr":
        facts = [
            _implies(_eq(b, zero), _eq(f, a)),
            _implies(make(">=", [b, num(k)]), _eq(f, zero)),
            make("<=", [f, a]),
        ]
    else:
        raise ValueError(f"unknown abstracted operator {app.op}")
    return [Lemma(fact, Tier.BASE, app) for fact in facts]


def instance_lemma(app: AbstractedApp, alpha: int, beta: int) -> Lemma:
    """Pin the application's value at one concrete argument pair."""
    k = app.width
    if not (0 <= alpha < (1 << k) and 0 <= beta < (1 << k)):
        raise ValueError(f"arguments ({alpha}, {beta}) out of range for width {k}")
    gamma = true_bv_function(app.op, k)(alpha, beta)
    a, b = app.arg_terms
    premise = make("and", [_eq(a, num(alpha)), _eq(b, num(beta))])
    return Lemma(_implies(premise, _eq(app.app_term, num(gamma))), Tier.INSTANCE, app)


def _bit(x: Term, i: int) -> Term:
    shifted = x if i == 0 else make("div", [x, num(1 << i)])
    return _eq(make("mod", [shifted, num(2)]), num(1))


def expansion_term(op: str, k: int, a: Term, b: Term) -> Term:
    """Integer term equal to the true operation on in-range arguments."""
    if op == "and":
        summands = []
        for i in range(k):
            both = make("ite", [make("and", [_bit(a, i), _bit(b, i)]), num(1), num(0)])
            summands.append(both if i == 0 else make("*", [num(1 << i), both]))
        return summands[0] if k == 1 else make("+", summands)
    # ite ladder over shift amounts 0..k-1; the tail covers b >= k
    ladder = num(0)
    for i in reversed(range(k)):
        if i == 0:
            arm = a
        elif op == "shl":
            arm = make("mod", [make("*", [a, num(1 << i)]), num(1 << k)])
        else:
            arm = make("div", [a, num(1 << i)])
        ladder = make("ite", [_eq(b, num(i)), arm, ladder])
    return ladder


def full_expansion(app: AbstractedApp) -> Lemma:
    a, b = app.arg_terms
    body = expansion_term(app.op, app.width, a, b)
    return Lemma(_eq(app.app_term, body), Tier.FULL_EXPANSION, app)


def core_lemma(assumptions_in_core, tm: TranslationMap) -> Lemma:
    """Block the core's assumptions: some pinned variable must differ.

    ``assumptions_in_core`` holds ``(name, value, width)`` triples; width 0
    marks a Bool variable.
    """
    if not assumptions_in_core:
        raise EmptyCoreError("unsat core is empty")
    literals = []
    for name, value, width in assumptions_in_core:
        x = tm.translated_var(name)
        if width:
            if not 0 <= value < (1 << width):
                raise ValueError(f"value {value} out of range for width {width}")
            literals.append(make("not", [_eq(x, num(value))]))
        else:
            literals.append(make("not", [_eq(x, boolean(bool(value)))]))
    return Lemma(disj(literals), Tier.UNDERAPPROX_CORE, None)

