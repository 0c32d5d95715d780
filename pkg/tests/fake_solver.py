"""Misbehaving stand-in for an SMT-LIB solver, one failure per mode."""

import sys
import time

mode = sys.argv[1]

for line in sys.stdin:
    cmd = line.strip()
    if not cmd:
        continue
    if cmd.startswith("(exit"):
        break
    if cmd.startswith("(set-option :produce-unsat-assumptions") and mode == "no-assumptions":
        print("unsupported")
    elif cmd.startswith("(check-sat"):
        if mode == "garbage":
            print("banana")
        elif mode == "unknown":
            print("unknown")
        elif mode == "sleep":
            time.sleep(30)
            print("sat")
        elif mode in ("badcore", "emptycore"):
            print("unsat")
        elif mode == "crash":
            sys.exit(1)
        else:
            print("sat")
    elif cmd.startswith("(get-unsat-assumptions"):
        print("(nobody)" if mode == "badcore" else "()")
    elif cmd.startswith("(get-value"):
        if mode == "negative":
            print("((x!0 (- 3)))")
        else:
            print("((x!0 9))")
    elif cmd.startswith("(assert") and mode == "error":
        print('(error "cannot assert that")')
    else:
        print("success")
    sys.stdout.flush()
