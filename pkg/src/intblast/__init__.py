"""Lazy int-blasting solver for quantifier-free bit-vector formulas."""

from .cegar import Config, SolveResult, solve, solve_with_oracle
from .frontend import ParseError, Script, expand_defines, parse_script, parse_term
from .oracle import brute_force_sat, check_equiv, evaluate
from .preprocess import count_core_ops, eliminate_derived_ops
from .terms import Sort, SortError, Term, UnsupportedError
from .translate import TranslationMap, to_bv, translate_formula, translate_term

__version__ = "0.1.0"
