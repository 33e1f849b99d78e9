"""Command line front end.

Exit codes: 0 everything passed, 1 a logical failure (rejected proof,
failed expectation, countermodel, soundness alarm), 2 a parse failure,
3 an oracle budget overflow.  Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .document import check_document, drop_axiom
from .mutate import mutate, run_mutant, write_mutants
from .oracle import DEFAULT_BUDGET, MAX_SIZE, OracleBudgetExceeded, entails
from .script import LemmaDecl, ParseError, parse_document, parse_formula
from .stoic import check_stoic_document, relevance_check

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_BUDGET = 0, 1, 2, 3


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def _diagnose(err: ParseError):
    for d in err.diagnostics:
        print(str(d), file=sys.stderr)


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SystemExit(f"organon: cannot read {path}: {e.strerror}")


def _parse(path):
    return parse_document(_read(path), str(path))


# -- check -----------------------------------------------------------------

def cmd_check(args):
    try:
        doc = _parse(args.path)
    except ParseError as e:
        _diagnose(e)
        if args.json:
            _emit({"schema_version": 1, "file": str(args.path), "verdict": "parse_error",
                   "diagnostics": [{"code": d.code, "message": d.message, "span": d.span.to_dict()}
                                   for d in e.diagnostics]})
        return EXIT_PARSE
    checked = check_document(doc)
    classical = [r.name for r in checked.reports if r.classification == "classical"]
    ok = checked.accepted and not (args.constructive_only and classical)
    if args.json:
        _emit({"schema_version": 1, "file": str(args.path),
               "verdict": "accepted" if checked.accepted else "rejected",
               "classification": ("classical" if classical else "constructive") if checked.accepted else None,
               "constructive_only": args.constructive_only,
               "reports": [r.to_dict() for r in checked.reports]})
    else:
        for r in checked.reports:
            if r.accepted:
                print(f"{r.name}: accepted ({r.classification})")
            else:
                print(f"{r.name}: rejected at {r.failure}")
    for r in checked.reports:
        if not r.accepted:
            span = r.failure.span
            where = f"{span}: " if span is not None else ""
            print(f"{where}error[{r.failure.error}]: {r.failure.reason}", file=sys.stderr)
    if args.constructive_only:
        for name in classical:
            print(f"error: {name} is classical (uses raa)", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


# -- corpus ----------------------------------------------------------------

def cmd_corpus(args):
    if args.action == "list":
        entries = corpus_mod.load_manifest()
        if args.json:
            _emit({"schema_version": corpus_mod.SCHEMA_VERSION,
                   "entries": [e.to_dict() for e in entries]})
        else:
            for e in entries:
                print(f"{e.file}\t{e.locus}\t{e.verdict}/{e.classification}\t{e.oracle}")
        return EXIT_OK
    report = corpus_mod.run_corpus()
    if args.json:
        print(report.to_json())
    else:
        for o in report.outcomes:
            status = "pass" if o.passed else "FAIL"
            print(f"{status} {o.entry.file}: {o.verdict}, {o.classification}, {o.oracle}")
        print(f"{report.passed}/{len(report.outcomes)} entries passed")
    for o in report.outcomes:
        for m in o.mismatches:
            print(f"{o.entry.file}: {m}", file=sys.stderr)
    return report.exit_status


# -- mutate ----------------------------------------------------------------

def cmd_mutate(args):
    text = _read(args.path)
    try:
        doc = parse_document(text, str(args.path))
    except ParseError as e:
        _diagnose(e)
        return EXIT_PARSE
    if not check_document(doc).accepted:
        print(f"error: {args.path} is not accepted; mutate needs an accepted script", file=sys.stderr)
        return EXIT_FAIL
    results = [run_mutant(m) for m in mutate(text, args.seed, args.count, str(args.path))]
    if args.out:
        manifest = write_mutants(results, args.out, Path(args.path).stem)
    else:
        manifest = {"schema_version": 1, "mutants": [r.to_dict() for r in results]}
    if args.json:
        _emit(manifest)
    else:
        for r in results:
            m = r.mutant
            print(f"{m.index:3d} {m.kind:16s} {m.proof}/{m.label}: {r.outcome} {r.error or ''}")
        print(f"{sum(not r.alarm for r in results)}/{len(results)} mutants rejected")
    alarms = [r for r in results if r.alarm]
    for r in alarms:
        print(f"soundness alarm: mutant {r.mutant.index} ({r.mutant.description}) was accepted",
              file=sys.stderr)
    return EXIT_FAIL if alarms else EXIT_OK


# -- oracle ----------------------------------------------------------------

def cmd_oracle(args):
    if not 1 <= args.max <= MAX_SIZE:
        print(f"error: --max must be between 1 and {MAX_SIZE}", file=sys.stderr)
        return EXIT_FAIL
    try:
        doc = _parse(args.theory)
        for name in args.without:
            doc = drop_axiom(doc, name)
        theory = check_document(doc).theory
        goal = parse_formula(args.goal, theory.signature.sorts, "<goal>")
    except ParseError as e:
        _diagnose(e)
        return EXIT_PARSE
    try:
        verdict = entails(theory, goal, args.max, args.budget)
    except OracleBudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        if args.json:
            _emit({"verdict": "budget_exceeded", "reason": str(e)})
        return EXIT_BUDGET
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    if args.json:
        _emit(verdict.to_dict())
    else:
        print(verdict)
    return EXIT_OK if verdict.verdict == "valid_up_to" else EXIT_FAIL


# -- stoic -----------------------------------------------------------------

def cmd_stoic(args):
    try:
        doc = _parse(args.path)
    except ParseError as e:
        _diagnose(e)
        return EXIT_PARSE
    reports = check_stoic_document(doc, args.xor_complement)
    checked = check_document(doc)
    relevance = []
    for d in doc.decls:
        if isinstance(d, LemmaDecl) and checked.report(d.name).accepted:
            theory = checked.context[d.name]
            relevance.append(relevance_check(theory, d.proof))
    if args.json:
        _emit({"schema_version": 1, "file": str(args.path),
               "derivations": [r.to_dict() for r in reports],
               "relevance": [r.to_dict() for r in relevance]})
    else:
        for r in reports:
            if r.accepted:
                print(f"{r.name}: accepted, {r.derived[-1][1] if r.derived else 'nothing derived'}")
            else:
                print(f"{r.name}: rejected at {r.failure}")
        for r in relevance:
            if r.used:
                state = "used"
            elif not r.in_fragment:
                state = "not in fragment (raa)"
            else:
                state = "unused " + ", ".join(sorted(r.unused))
            print(f"{r.name}: {state}")
    for r in reports:
        if not r.accepted:
            print(f"{r.failure.span or r.name}: error[{r.failure.error}]: {r.failure.reason}",
                  file=sys.stderr)
    return EXIT_OK if all(r.accepted for r in reports) else EXIT_FAIL


# -- entry point -----------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="organon",
                                description="Check natural deduction proof scripts.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="check every lemma and proof in a script")
    c.add_argument("path")
    c.add_argument("--json", action="store_true")
    c.add_argument("--constructive-only", action="store_true",
                   help="fail any proof that uses raa")
    c.set_defaults(fn=cmd_check)

    c = sub.add_parser("corpus", help="run or list the bundled corpus")
    c.add_argument("action", choices=("run", "list"))
    c.add_argument("--json", action="store_true")
    c.set_defaults(fn=cmd_corpus)

    c = sub.add_parser("mutate", help="generate and check seeded mutants")
    c.add_argument("path")
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--count", type=int, default=10)
    c.add_argument("--out", help="directory for mutant scripts and manifest.json")
    c.add_argument("--json", action="store_true")
    c.set_defaults(fn=cmd_mutate)

    c = sub.add_parser("oracle", help="finite-model entailment check")
    c.add_argument("theory")
    c.add_argument("goal")
    c.add_argument("--max", type=int, required=True)
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    c.add_argument("--without", action="append", default=[], metavar="AXIOM",
                   help="drop an axiom (and the lines citing it) first")
    c.add_argument("--json", action="store_true")
    c.set_defaults(fn=cmd_oracle)

    c = sub.add_parser("stoic", help="check sequent derivations and relevance")
    c.add_argument("path")
    c.add_argument("--json", action="store_true")
    c.add_argument("--xor-complement", action="store_true",
                   help="add the classical complement of exclusive disjunction")
    c.set_defaults(fn=cmd_stoic)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
