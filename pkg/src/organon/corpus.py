"""The bundled corpus, its manifest of expectations and the corpus runner."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from .document import check_document
from .kernel import meta_signature
from .oracle import DEFAULT_BUDGET, Countermodel, OracleBudgetExceeded, entails
from .script import LemmaDecl, ParseError, parse_document

SCHEMA_VERSION = 1
CORPUS_ENV = "ORGANON_CORPUS"
ORACLE_SIZE = 3
SKIPPED = "skipped: functions"


def corpus_dir() -> Path:
    """Corpus directory: ``$ORGANON_CORPUS`` if set, else the bundled copy."""
    override = os.environ.get(CORPUS_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("organon") / "corpus"))


@dataclass(frozen=True)
class CorpusEntry:
    file: str
    locus: str
    verdict: str
    classification: str
    oracle: str

    @property
    def name(self):
        return self.file.removesuffix(".anc")

    def to_dict(self):
        return {"name": self.name, "file": self.file, "locus": self.locus,
                "verdict": self.verdict, "classification": self.classification,
                "oracle": self.oracle}


def load_manifest(root=None):
    root = Path(root) if root is not None else corpus_dir()
    data = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    entries = [CorpusEntry(**e) for e in data["entries"]]
    return sorted(entries, key=lambda e: e.name)


def header_locus(text):
    for line in text.splitlines():
        if line.startswith("# locus:"):
            return line[len("# locus:"):].strip()
    return None


@dataclass
class Outcome:
    entry: CorpusEntry
    verdict: str = None
    classification: str = None
    oracle: str = None
    failure: dict = None
    mismatches: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.mismatches

    def to_dict(self):
        return {
            "name": self.entry.name,
            "file": self.entry.file,
            "locus": self.entry.locus,
            "expected": {"verdict": self.entry.verdict,
                         "classification": self.entry.classification,
                         "oracle": self.entry.oracle},
            "observed": {"verdict": self.verdict,
                         "classification": self.classification,
                         "oracle": self.oracle},
            "failure": self.failure,
            "passed": self.passed,
            "mismatches": list(self.mismatches),
        }


def oracle_verdict(checked, max_size=ORACLE_SIZE, budget=DEFAULT_BUDGET):
    """Oracle verdict for a whole checked document.

    Every lemma and proof goal is tested against the theory in force where
    it was declared.  The first non-valid goal decides the result.
    """
    for d in checked.document.decls:
        if not isinstance(d, LemmaDecl):
            continue
        theory = checked.context[d.name]
        theory = theory.with_signature(meta_signature(theory.signature, d.metas))
        v = entails(theory, d.goal, max_size, budget)
        if isinstance(v, Countermodel):
            return f"countermodel({d.name})"
    return f"valid_up_to({max_size})"


def run_entry(entry: CorpusEntry, root=None) -> Outcome:
    root = Path(root) if root is not None else corpus_dir()
    out = Outcome(entry)
    path = root / entry.file
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        out.verdict = "missing"
        out.mismatches.append(f"cannot read {entry.file}: {e.strerror}")
        return out
    locus = header_locus(text)
    if locus != entry.locus:
        out.mismatches.append(f"locus header {locus!r} differs from manifest {entry.locus!r}")
    try:
        doc = parse_document(text, entry.file)
    except ParseError as e:
        out.verdict = "parse_error"
        d = e.diagnostics[0]
        out.failure = {"error": d.code, "reason": d.message, "span": d.span.to_dict()}
        out.mismatches.append(f"verdict: expected {entry.verdict}, got parse_error")
        return out
    checked = check_document(doc)
    out.verdict = "accepted" if checked.accepted else "rejected"
    bad = checked.first_failure()
    if bad is not None:
        f = bad.failure
        out.failure = {"proof": bad.name, "label": f.label, "error": f.error, "reason": f.reason}
    if checked.accepted:
        classical = any(r.classification == "classical" for r in checked.reports)
        out.classification = "classical" if classical else "constructive"
    if out.verdict != entry.verdict:
        out.mismatches.append(f"verdict: expected {entry.verdict}, got {out.verdict}")
    if out.classification != entry.classification and entry.verdict == "accepted":
        out.mismatches.append(
            f"classification: expected {entry.classification}, got {out.classification}")
    if entry.oracle == SKIPPED:
        out.oracle = SKIPPED
    else:
        try:
            out.oracle = oracle_verdict(checked)
        except OracleBudgetExceeded as e:
            out.oracle = f"budget exceeded: {e}"
        if out.oracle != entry.oracle:
            out.mismatches.append(f"oracle: expected {entry.oracle}, got {out.oracle}")
    return out


@dataclass
class RunReport:
    outcomes: list
    timestamp: str = None

    @property
    def passed(self):
        return sum(o.passed for o in self.outcomes)

    @property
    def exit_status(self):
        return 0 if all(o.passed for o in self.outcomes) else 1

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "timestamp": self.timestamp,
            "entries": [o.to_dict() for o in self.outcomes],
            "summary": {"total": len(self.outcomes), "passed": self.passed,
                        "failed": len(self.outcomes) - self.passed},
            "exit_status": self.exit_status,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def run_corpus(root=None) -> RunReport:
    root = Path(root) if root is not None else corpus_dir()
    outcomes = [run_entry(e, root) for e in load_manifest(root)]
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return RunReport(sorted(outcomes, key=lambda o: o.entry.name), stamp)
