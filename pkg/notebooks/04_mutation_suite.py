"""
Breaking proofs on purpose
==========================

Every mutant of an accepted proof should be refused.  A mutant the kernel
accepts would be a soundness alarm.
"""

from collections import Counter

from organon.corpus import corpus_dir, load_manifest
from organon.mutate import mutate, run_mutant

outcomes = Counter()
alarms = []
for entry in load_manifest():
    text = (corpus_dir() / entry.file).read_text()
    for seed in range(3):
        for m in mutate(text, seed, 12, entry.file):
            r = run_mutant(m)
            outcomes[(m.kind, r.error)] += 1
            if r.alarm:
                alarms.append(m.description)

for (kind, error), n in sorted(outcomes.items()):
    print(f"{kind:18s} {error:26s} {n}")
print("alarms:", alarms or "none")
