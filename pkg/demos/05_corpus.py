"""Generate a small corpus and check the loop against the oracle on it."""

import shutil
import tempfile
from collections import Counter

from intblast import Config, solve
from intblast.corpus import GeneratorSpec, crafted_families, generate, oracle_verdict, write_corpus

scripts = generate(GeneratorSpec(seed=42, num_vars=2, max_depth=3, count=40))
entries = [("random", f"random/{i:02d}", s) for i, s in enumerate(scripts)]
entries += [(name.split("/")[0], name, s) for name, s in crafted_families()]

out = tempfile.mkdtemp(prefix="intblast-corpus-")
manifest = write_corpus(out, entries)
print("wrote", len(entries), "scripts; manifest at", manifest)

z3 = shutil.which("z3")
if z3:
    cfg = Config(nia_solver=[z3, "-in", "-smt2"], underapprox_enabled=False)
    tally = Counter()
    for _, name, s in entries:
        expected = oracle_verdict(s)
        got = solve(s, cfg).verdict
        tally["agree" if expected in (None, got) else "disagree"] += 1
    print(tally)
