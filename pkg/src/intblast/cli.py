"""Command-line driver: ``intblast [options] [FILE]``.

Exit status: 0 for sat/unsat, 1 for unknown, 2 for usage or input errors,
3 for backend failures.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .cegar import Config, preprocessed_text, solve, solve_with_oracle, translation_text
from .frontend import ParseError, RecursiveDefinitionError, model_block, parse_script
from .solver import BackendError
from .terms import SortError, UnsupportedError

EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE, EXIT_BACKEND = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {n}")
    return n


def _non_negative(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="intblast",
        description="Decide a QF_BV script by lazy translation to integer arithmetic.",
    )
    p.add_argument("file", nargs="?", help="SMT-LIB 2 script (default: standard input)")
    p.add_argument("--nia-solver", metavar="CMD",
                   help="QF_UFNIA solver command line (default: $INTBLAST_NIA_SOLVER)")
    p.add_argument("--bv-solver", metavar="CMD",
                   help="QF_BV solver command line (default: $INTBLAST_BV_SOLVER)")
    p.add_argument("--no-underapprox", action="store_true",
                   help="never run the bit-vector under-approximation check")
    p.add_argument("--escalation-threshold", type=_positive, default=8, metavar="N",
                   help="instance lemmas per application before full expansion (default 8)")
    p.add_argument("--max-iterations", type=_positive, default=10000, metavar="N")
    p.add_argument("--timeout-ms", type=_non_negative, metavar="N")
    p.add_argument("--get-model", action="store_true", help="print a model after sat")
    p.add_argument("--stats", action="store_true", help="print a JSON stats line on stderr")
    p.add_argument("--dump-translation", metavar="PATH")
    p.add_argument("--dump-preprocessed", metavar="PATH")
    p.add_argument("--dump-lemmas", metavar="PATH")
    p.add_argument("--oracle", action="store_true", help="decide by brute-force enumeration")
    p.add_argument("--expand-on-unknown", action="store_true")
    p.add_argument("--underapprox-after-refine", action="store_true")
    return p


def _command(flag_value: str | None, env_name: str, flag: str, environ) -> list[str] | None:
    if flag_value is not None:
        words = flag_value.split()
        if not words:
            raise UsageError(f"{flag} must not be empty")
        return words
    words = environ.get(env_name, "").split()
    return words or None


def parse_flags(argv, environ=None):
    """Parsed namespace plus the solver :class:`Config`.

    Raises ``SystemExit(2)`` on malformed flags and :class:`UsageError`
    when the flags are well-formed but inconsistent.
    """
    environ = os.environ if environ is None else environ
    args = build_parser().parse_args(argv)
    nia = _command(args.nia_solver, "INTBLAST_NIA_SOLVER", "--nia-solver", environ)
    bv = _command(args.bv_solver, "INTBLAST_BV_SOLVER", "--bv-solver", environ)
    if nia is None and not args.oracle:
        raise UsageError("no integer solver: pass --nia-solver or set INTBLAST_NIA_SOLVER")
    cfg = Config(
        nia_solver=nia,
        bv_solver=bv,
        underapprox_enabled=not args.no_underapprox and bv is not None,
        escalation_threshold=args.escalation_threshold,
        max_iterations=args.max_iterations,
        timeout_ms=args.timeout_ms,
        expand_on_unknown=args.expand_on_unknown,
        underapprox_after_refine=args.underapprox_after_refine,
        dump_lemmas=args.dump_lemmas,
    )
    return args, cfg


def _write(path: str, text: str):
    with open(path, "w") as f:
        f.write(text)


def main(argv=None, stdin=None, stdout=None, stderr=None, environ=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    logging.basicConfig(stream=stderr, level=logging.WARNING,
                        format="intblast: %(levelname)s: %(message)s")
    try:
        args, cfg = parse_flags(argv, environ)
    except UsageError as e:
        print(f"intblast: error: {e}", file=stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        if args.file:
            with open(args.file, encoding="utf-8") as f:
                script = parse_script(f)
        else:
            script = parse_script(stdin)
        if args.dump_preprocessed:
            _write(args.dump_preprocessed, preprocessed_text(script))
        if args.dump_translation:
            _write(args.dump_translation, translation_text(script))
    except (ParseError, SortError, UnsupportedError, RecursiveDefinitionError) as e:
        print(f"intblast: error: {e}", file=stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"intblast: error: {e}", file=stderr)
        return EXIT_USAGE

    result = solve_with_oracle(script) if args.oracle else solve(script, cfg)
    stdout.write(result.verdict + "\n")
    if args.get_model and result.verdict == "sat":
        stdout.write(model_block(result.model) + "\n")
    stdout.flush()
    if args.stats:
        print(result.stats.to_json(), file=stderr)
    if result.error is not None:
        print(f"intblast: {result.error}", file=stderr)
        if not args.oracle:
            return EXIT_BACKEND
    return EXIT_UNKNOWN if result.verdict == "unknown" else EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
