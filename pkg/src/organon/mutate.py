"""Seeded mutation of accepted proof scripts.

Every mutant of an accepted script must be rejected by the kernel or fail
to parse.  A mutant that still checks is a soundness alarm.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .document import check_document
from .kernel import (
    CITING_RULES, EIGEN_VIOLATION, FORMULA_ARG_RULES, GOAL_MISMATCH, TERM_ARG_RULES, Block,
    BlockRef,
)
from .logic import (
    And, Binary, Exists, Forall, Implies, Or, Quant, Var, alpha_eq, apply_subst, constants,
    free_vars, fresh_name,
)
from .script import (
    LemmaDecl, ParseError, SourceSpan, Document, parse_document, render_document, tokenize,
)

KINDS = ("swap_labels", "eigen_leak", "delete_brace", "replace_rule", "alter_connective")
PARSE_FAILURE = "parse_failure"


@dataclass(frozen=True)
class Mutant:
    index: int
    kind: str
    proof: str
    label: str
    description: str
    text: str
    expected: str = None  # error class the mutation targets, when it targets one
    region: SourceSpan = None

    def to_dict(self):
        out = {"index": self.index, "kind": self.kind, "proof": self.proof, "label": self.label,
               "description": self.description, "expected": self.expected}
        if self.region is not None:
            out["region"] = self.region.to_dict()
        return out


@dataclass(frozen=True)
class MutantResult:
    mutant: Mutant
    outcome: str  # rejected | parse_failure | accepted
    error: str = None
    reason: str = None
    span: SourceSpan = None

    @property
    def alarm(self):
        return self.outcome == "accepted"

    @property
    def as_expected(self):
        m = self.mutant
        if self.alarm:
            return False
        if m.expected == PARSE_FAILURE:
            return self.outcome == PARSE_FAILURE and self.span_in_region
        return m.expected is None or self.error == m.expected

    @property
    def span_in_region(self):
        r, s = self.mutant.region, self.span
        if r is None or s is None:
            return False
        return r.covers(s.start_line, s.start_col, s.end_line, s.end_col)

    def to_dict(self):
        out = {**self.mutant.to_dict(), "outcome": self.outcome, "error": self.error,
               "reason": self.reason, "as_expected": self.as_expected}
        if self.span is not None:
            out["span"] = self.span.to_dict()
        return out


# -- walking proofs --------------------------------------------------------

def _scoped_lines(block, visible, out):
    """(line, labels visible to it) for every non-hypothesis line."""
    visible = list(visible)
    if block.hyp is not None:
        visible.append(block.hyp.label)
    for e in block.entries:
        if isinstance(e, Block):
            _scoped_lines(e, visible, out)
        else:
            out.append((e, frozenset(visible)))
            visible.append(e.label)
    return out


def _map_lines(block, label, fn):
    hyp = block.hyp
    if hyp is not None and hyp.label == label:
        hyp = fn(hyp)
    entries = []
    for e in block.entries:
        if isinstance(e, Block):
            entries.append(_map_lines(e, label, fn))
        else:
            entries.append(fn(e) if e.label == label else e)
    return replace(block, hyp=hyp, entries=tuple(entries))


def _find_block(body, ref):
    for b in body.blocks():
        if b.first_label == ref.first and b.last_label == ref.last:
            return b
    return None


def _end_line(block):
    last = block.entries[-1] if block.entries else None
    if isinstance(last, Block):
        return _end_line(last)
    return last if last is not None else block.hyp


def _with_decl(doc, old, new):
    return Document(tuple(new if d is old else d for d in doc.decls), doc.file)


def _with_line(doc, decl, label, fn):
    return _with_decl(doc, decl, replace(decl, body=_map_lines(decl.body, label, fn)))


# -- connective sites ------------------------------------------------------

_SWAPS = {And: (Or, Implies), Or: (And, Implies), Implies: (And, Or),
          Forall: (Exists,), Exists: (Forall,)}


def _connective_paths(f, path=()):
    if isinstance(f, Binary):
        yield path
        yield from _connective_paths(f.left, path + ("left",))
        yield from _connective_paths(f.right, path + ("right",))
    elif isinstance(f, Quant):
        yield path
        yield from _connective_paths(f.body, path + ("body",))


def _rebuild(f, path, cls):
    if not path:
        return cls(*(getattr(f, fl.name) for fl in fields(f)))
    head, rest = path[0], path[1:]
    return replace(f, **{head: _rebuild(getattr(f, head), rest, cls)})


def _at(f, path):
    for p in path:
        f = getattr(f, p)
    return f


# -- site generation -------------------------------------------------------

def _sites(doc, text):
    """All candidate mutations of ``doc``, grouped by kind, in document order.

    Each site is ``(proof, label, description, make)`` where ``make()``
    returns ``(text, expected, region)``.
    """
    sites = {k: [] for k in KINDS}
    for decl in doc.decls:
        if not isinstance(decl, LemmaDecl):
            continue
        body = decl.body
        formulas = {ln.label: ln.formula for ln in body.lines()}
        everything = [ln.label for ln in body.lines()]
        for line, visible in _scoped_lines(body, (), []):
            just = line.just
            _swap_sites(sites, doc, decl, line, visible, everything, formulas)
            if just.rule in ("all_i", "ex_e"):
                _leak_site(sites, doc, decl, line)
            if just.rule in CITING_RULES:
                for rule in _rule_alternatives(just):
                    def make(decl=decl, line=line, rule=rule):
                        fn = lambda ln: replace(ln, just=replace(ln.just, rule=rule))
                        return render_document(_with_line(doc, decl, line.label, fn)), None, None
                    sites["replace_rule"].append(
                        (decl.name, line.label, f"rule {just.rule} replaced by {rule}", make))
        for ln in body.lines():
            for path in _connective_paths(ln.formula):
                node = _at(ln.formula, path)
                for cls in _SWAPS[type(node)]:
                    def make(decl=decl, ln=ln, path=path, cls=cls):
                        fn = lambda x: replace(x, formula=_rebuild(x.formula, path, cls))
                        return render_document(_with_line(doc, decl, ln.label, fn)), None, None
                    sites["alter_connective"].append(
                        (decl.name, ln.label,
                         f"{type(node).__name__} at {'.'.join(path) or 'top'} becomes {cls.__name__}",
                         make))
        for path in _connective_paths(decl.goal):
            node = _at(decl.goal, path)
            for cls in _SWAPS[type(node)]:
                def make(decl=decl, path=path, cls=cls):
                    new = replace(decl, goal=_rebuild(decl.goal, path, cls))
                    return render_document(_with_decl(doc, decl, new)), GOAL_MISMATCH, None
                sites["alter_connective"].append(
                    (decl.name, "goal",
                     f"goal {type(node).__name__} at {'.'.join(path) or 'top'} becomes {cls.__name__}",
                     make))
    _brace_sites(sites, doc, text)
    return sites


def _swap_sites(sites, doc, decl, line, visible, everything, formulas):
    refs = line.just.refs
    for i in range(len(refs)):
        for j in range(i + 1, len(refs)):
            a, b = refs[i], refs[j]
            if type(a) is not type(b):
                continue
            if isinstance(a, str):
                fa, fb = formulas.get(a), formulas.get(b)
            else:
                fa, fb = _hyp_of(decl.body, a), _hyp_of(decl.body, b)
            if fa is None or fb is None or alpha_eq(fa, fb):
                continue
            swapped = list(refs)
            swapped[i], swapped[j] = b, a

            def make(decl=decl, line=line, swapped=tuple(swapped)):
                fn = lambda ln: replace(ln, just=replace(ln.just, refs=swapped))
                return render_document(_with_line(doc, decl, line.label, fn)), None, None
            sites["swap_labels"].append(
                (decl.name, line.label, f"citations {a} and {b} swapped", make))
    for i, r in enumerate(refs):
        if not isinstance(r, str):
            continue
        for other in everything:
            if other in visible or other == line.label or other == r:
                continue
            if alpha_eq(formulas[other], formulas[r]):
                continue
            new_refs = refs[:i] + (other,) + refs[i + 1:]

            def make(decl=decl, line=line, new_refs=new_refs):
                fn = lambda ln: replace(ln, just=replace(ln.just, refs=new_refs))
                return render_document(_with_line(doc, decl, line.label, fn)), None, None
            sites["swap_labels"].append(
                (decl.name, line.label, f"citation {r} replaced by out-of-scope {other}", make))


def _hyp_of(body, ref):
    b = _find_block(body, ref)
    return b.hyp.formula if b is not None and b.hyp is not None else None


def _leak_site(sites, doc, decl, line):
    blocks = [r for r in line.just.refs if isinstance(r, BlockRef)]
    if not blocks:
        return
    b = _find_block(decl.body, blocks[-1])
    if b is None or b.eigen is None:
        return
    if line.just.rule == "all_i":
        if not isinstance(line.formula, Forall):
            return
        end = _end_line(b)
        q = line.formula
        # rename the binder so it cannot capture the leaked constant on reparse
        x = fresh_name(q.var, {b.eigen[0]} | {v.name for v in free_vars(q.body)} | constants(end.formula), numeric=True)
        body = apply_subst(q.body, {q.bound: Var(x, q.sort)})
        leaked = replace(q, var=x, body=And(body, end.formula))
        what = "block conclusion"
    else:
        if b.hyp is None:
            return
        leaked = And(line.formula, b.hyp.formula)
        what = "block assumption"

    def make():
        fn = lambda ln: replace(ln, formula=leaked)
        return render_document(_with_line(doc, decl, line.label, fn)), EIGEN_VIOLATION, None
    sites["eigen_leak"].append(
        (decl.name, line.label, f"eigen constant {b.eigen[0]} leaked via the {what}", make))


def _rule_alternatives(just):
    if just.arg is not None:
        pool = FORMULA_ARG_RULES if just.rule in FORMULA_ARG_RULES else TERM_ARG_RULES
    else:
        pool = CITING_RULES - FORMULA_ARG_RULES - TERM_ARG_RULES
    return sorted(pool - {just.rule})


def _brace_sites(sites, doc, text):
    """Opening braces of nested blocks that follow a complete proof line."""
    try:
        toks = tokenize(text, doc.file)
    except ParseError:
        return
    owner = {}
    for d in doc.decls:
        if isinstance(d, LemmaDecl) and d.span is not None:
            owner[d.span.start_line] = d.name
    current = None
    lines = text.replace("\r\n", "\n").split("\n")
    for i, t in enumerate(toks):
        current = owner.get(t.line, current)
        if t.text != "{" or i == 0 or i + 1 >= len(toks):
            continue
        prev, nxt = toks[i - 1], toks[i + 1]
        if nxt.text not in ("assume", "fix"):
            continue
        if prev.text == "}":
            pass
        elif prev.text == ";":
            k = i - 2
            while k >= 0 and toks[k].text not in (";", "{", "}"):
                k -= 1
            if toks[k + 1].kind != "id":
                continue
        else:
            continue

        def make(t=t, nxt=nxt):
            row = lines[t.line - 1]
            mutated = list(lines)
            mutated[t.line - 1] = row[:t.col - 1] + " " + row[t.col:]
            region = SourceSpan(doc.file, t.line, t.col, nxt.end_line, nxt.end_col)
            return "\n".join(mutated), PARSE_FAILURE, region
        sites["delete_brace"].append(
            (current, f"{t.line}:{t.col}", f"opening brace at {t.line}:{t.col} deleted", make))


# -- driver ----------------------------------------------------------------

def mutate(text, seed, count=10, file="<input>"):
    """``count`` distinct mutants of ``text`` drawn with ``random.Random(seed)``.

    Kinds are visited round robin (in a seeded order) so every kind with a
    site is represented; sites within a kind are drawn without replacement.
    """
    doc = parse_document(text, file)
    pools = {k: list(v) for k, v in _sites(doc, text).items() if v}
    rng = random.Random(seed)
    order = sorted(pools)
    rng.shuffle(order)
    out = []
    while len(out) < count and order:
        for kind in list(order):
            if len(out) >= count:
                break
            pool = pools[kind]
            proof, label, what, make = pool.pop(rng.randrange(len(pool)))
            if not pool:
                order.remove(kind)
            new_text, expected, region = make()
            out.append(Mutant(len(out) + 1, kind, proof, label, what, new_text, expected, region))
    return out


def run_mutant(m: Mutant, file="<mutant>") -> MutantResult:
    try:
        doc = parse_document(m.text, file if m.region is None else m.region.file)
    except ParseError as e:
        d = e.diagnostics[0]
        return MutantResult(m, PARSE_FAILURE, d.code, d.message, d.span)
    checked = check_document(doc)
    bad = checked.first_failure()
    if bad is None:
        return MutantResult(m, "accepted")
    f = bad.failure
    return MutantResult(m, "rejected", f.error, f.reason, f.span)


def write_mutants(results, out_dir, stem):
    """Write each mutant script and a manifest of what it must produce."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for r in results:
        name = f"{stem}_m{r.mutant.index:02d}.anc"
        text = r.mutant.text if r.mutant.text.endswith("\n") else r.mutant.text + "\n"
        (out_dir / name).write_text(text, encoding="utf-8")
        entries.append({"file": name, **r.to_dict()})
    manifest = {"schema_version": 1, "mutants": entries}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                           encoding="utf-8")
    return manifest
