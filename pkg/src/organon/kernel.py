"""Natural deduction proof checker.

Proofs are Fitch-style blocks.  A block may open with an assumption
(``assume``) and/or an eigen constant (``fix``).  The rule inventory is
fixed::

    hyp  axiom  lemma  schema
    and_i  and_e1  and_e2  or_i1  or_i2  or_e
    imp_i  imp_e  raa  all_i  all_e  ex_i  ex_e  reit

Rules that discharge a block cite it as ``first-last`` (the labels of the
block's first and final lines).  Every comparison of formulas is up to
alpha-equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .logic import (
    FALSUM, App, Const, Exists, Forall, Formula, Implies, Not, Or, And, SignatureError,
    SortError, Signature, Var, alpha_eq, constants, forall, format_formula, format_term,
    free_vars, instantiate, replace_symbols, term_sort, term_vars, well_sorted,
)

UNKNOWN_LABEL = "unknown_label"
SCOPE_VIOLATION = "scope_violation"
RULE_MISMATCH = "rule_mismatch"
EIGEN_VIOLATION = "eigenvariable_violation"
SORT_ERROR = "sort_error"
OPEN_HYPOTHESIS = "open_hypothesis"
GOAL_MISMATCH = "goal_mismatch"

ERROR_CLASSES = (UNKNOWN_LABEL, SCOPE_VIOLATION, RULE_MISMATCH, EIGEN_VIOLATION,
                 SORT_ERROR, OPEN_HYPOTHESIS, GOAL_MISMATCH)

BLOCK_RULES = frozenset({"imp_i", "raa", "all_i", "or_e", "ex_e"})
NAMED_RULES = frozenset({"axiom", "lemma", "schema"})
TERM_ARG_RULES = frozenset({"all_e", "ex_i"})
FORMULA_ARG_RULES = frozenset({"or_i1", "or_i2"})
CITING_RULES = frozenset({"and_i", "and_e1", "and_e2", "or_i1", "or_i2", "imp_e",
                          "all_e", "ex_i", "reit"}) | BLOCK_RULES
RULES = CITING_RULES | NAMED_RULES | {"hyp"}


class InstantiationError(ValueError):
    pass


class ProofRejected(ValueError):
    def __init__(self, report):
        super().__init__(f"{report.name} rejected: {report.failure}")
        self.report = report


# -- proof objects ---------------------------------------------------------

@dataclass(frozen=True)
class BlockRef:
    first: str
    last: str

    def __str__(self):
        return f"{self.first}-{self.last}"


@dataclass(frozen=True)
class Justification:
    rule: str
    refs: tuple = ()
    name: str = None
    arg: object = None
    bindings: tuple = ()

    def __str__(self):
        parts = [self.rule]
        if self.name is not None:
            parts.append(self.name)
        if self.refs:
            parts.append(", ".join(str(r) for r in self.refs))
        if self.arg is not None:
            parts.append(f"[{_show(self.arg)}]")
        if self.bindings:
            parts.append("[" + ", ".join(f"{k} := {_show(v)}" for k, v in self.bindings) + "]")
        return " ".join(parts)


def _show(x):
    return format_formula(x) if isinstance(x, Formula) else format_term(x)


HYP = Justification("hyp")


@dataclass(frozen=True)
class Line:
    label: str
    formula: Formula
    just: Justification
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Block:
    entries: tuple = ()
    hyp: Line = None
    eigen: tuple = None
    span: object = field(default=None, compare=False, repr=False)

    def lines(self):
        """Every line in the block and its sub-blocks, in document order."""
        if self.hyp is not None:
            yield self.hyp
        for e in self.entries:
            if isinstance(e, Block):
                yield from e.lines()
            else:
                yield e

    def blocks(self):
        for e in self.entries:
            if isinstance(e, Block):
                yield e
                yield from e.blocks()

    @property
    def first_label(self):
        return next((ln.label for ln in self.lines()), None)

    @property
    def last_label(self):
        if self.entries:
            last = self.entries[-1]
            return last.last_label if isinstance(last, Block) else last.label
        return self.hyp.label if self.hyp is not None else None


@dataclass(frozen=True)
class Meta:
    """Schema metavariable: ``kind`` is ``"formula"`` or a sort name."""
    name: str
    kind: str

    @property
    def is_formula(self):
        return self.kind == "formula"


@dataclass(frozen=True)
class Schema:
    metas: tuple
    body: Formula

    def closure(self):
        """Universal closure over the term metavariables, or None if any
        metavariable ranges over formulas."""
        if any(m.is_formula for m in self.metas):
            return None
        vs = [Var(m.name, m.kind) for m in self.metas]
        return forall(vs, replace_symbols(self.body, {m.name: v for m, v in zip(self.metas, vs)}))


@dataclass(frozen=True)
class Proof:
    name: str
    goal: Formula
    body: Block
    metas: tuple = ()


@dataclass(frozen=True)
class Lemma:
    name: str
    statement: Formula
    proof: Proof
    metas: tuple = ()
    classical: bool = False


def meta_signature(sig: Signature, metas) -> Signature:
    """``sig`` extended with opaque symbols standing for ``metas``."""
    for m in metas:
        sig = sig.add_predicate(m.name, ()) if m.is_formula else sig.add_constant(m.name, m.kind)
    return sig


@dataclass(frozen=True)
class Theory:
    signature: Signature = field(default_factory=Signature)
    axioms: Mapping[str, Formula] = field(default_factory=dict)
    schemata: Mapping[str, Schema] = field(default_factory=dict)
    lemmas: Mapping[str, Lemma] = field(default_factory=dict)

    def _names(self):
        return set(self.axioms) | set(self.schemata) | set(self.lemmas)

    def with_signature(self, sig) -> "Theory":
        return Theory(sig, self.axioms, self.schemata, self.lemmas)

    def add_axiom(self, name, f) -> "Theory":
        if name in self._names():
            raise ValueError(f"duplicate name {name!r}")
        diags = well_sorted(self.signature, f)
        if diags:
            raise SortError(f"axiom {name}: {diags[0]}")
        if free_vars(f):
            raise SortError(f"axiom {name} is not closed")
        return Theory(self.signature, {**self.axioms, name: f}, self.schemata, self.lemmas)

    def add_schema(self, name, schema: Schema) -> "Theory":
        if name in self._names():
            raise ValueError(f"duplicate name {name!r}")
        sig = meta_signature(self.signature, schema.metas)
        diags = well_sorted(sig, schema.body)
        if diags:
            raise SortError(f"schema {name}: {diags[0]}")
        if free_vars(schema.body):
            raise SortError(f"schema {name} has free variables")
        return Theory(self.signature, self.axioms, {**self.schemata, name: schema}, self.lemmas)


def instantiate_metas(metas, body, bindings, sig: Signature = None):
    bindings = dict(bindings)
    names = [m.name for m in metas]
    missing = [n for n in names if n not in bindings]
    if missing:
        raise InstantiationError(f"missing binding for {', '.join(missing)}")
    extra = [n for n in bindings if n not in names]
    if extra:
        raise InstantiationError(f"no metavariable named {', '.join(extra)}")
    consts, atoms = {}, {}
    for m in metas:
        value = bindings[m.name]
        if m.is_formula:
            if not isinstance(value, Formula):
                raise InstantiationError(f"{m.name} expects a formula")
            atoms[m.name] = value
        else:
            if not isinstance(value, (Var, Const, App)):
                raise InstantiationError(f"{m.name} expects a term of sort {m.kind}")
            if sig is not None:
                diags = well_sorted(sig, value)
                if diags:
                    raise SortError(str(diags[0]))
                got = term_sort(sig, value)
                if got != m.kind:
                    raise SortError(f"{m.name} expects sort {m.kind}, got {format_term(value)} of sort {got}")
            consts[m.name] = value
    return replace_symbols(body, consts, atoms)


def instantiate_schema(s: Schema, bindings, sig: Signature = None) -> Formula:
    """Fill every hole of ``s``; raises InstantiationError or SortError."""
    return instantiate_metas(s.metas, s.body, bindings, sig)


# -- reports ---------------------------------------------------------------

@dataclass(frozen=True)
class Failure:
    label: str
    error: str
    reason: str
    span: object = field(default=None, compare=False)

    def __str__(self):
        return f"{self.label}: {self.error}: {self.reason}"


@dataclass(frozen=True)
class CheckReport:
    name: str
    verdict: str
    lines: tuple
    failure: Failure = None
    classification: str = None
    discharges: Mapping = field(default_factory=dict)

    @property
    def accepted(self):
        return self.verdict == "accepted"

    def to_dict(self):
        out = {
            "name": self.name,
            "verdict": self.verdict,
            "classification": self.classification,
            "lines": [{"label": lab, "status": st} for lab, st in self.lines],
            "discharges": {h: {"by": by, "rule": rule} for h, (by, rule) in self.discharges.items()},
            "failure": None,
        }
        if self.failure is not None:
            f = self.failure
            out["failure"] = {"label": f.label, "error": f.error, "reason": f.reason}
            if f.span is not None:
                out["failure"]["span"] = f.span.to_dict()
        return out


# -- checker ---------------------------------------------------------------

class _Fail(Exception):
    def __init__(self, error, reason):
        super().__init__(reason)
        self.error = error
        self.reason = reason


@dataclass
class _BlockInfo:
    first: str
    last: str
    hyp: Formula
    hyp_label: str
    eigen: tuple
    end: Formula
    discharged_by: str = None


class _Frame:
    def __init__(self, sig):
        self.sig = sig
        self.lines = {}
        self.blocks = {}
        self.hyp = None
        self.eigen = None


class _Checker:
    def __init__(self, theory: Theory, proof: Proof, sig: Signature):
        self.theory = theory
        self.proof = proof
        self.sig = sig
        self.frames = []
        self.statuses = {}
        self.failure = None
        self.discharges = {}
        self.classical = False
        self.labels = {}
        self.eigens = set()
        self.spans = set()
        self.duplicates = []
        for ln in proof.body.lines():
            if ln.label in self.labels:
                self.duplicates.append(ln)
            self.labels[ln.label] = ln
        for b in [proof.body, *proof.body.blocks()]:
            if b.eigen is not None:
                self.eigens.add(b.eigen[0])
            self.spans.add((b.first_label, b.last_label))

    def fail(self, label, error, reason, span=None):
        self.statuses[label] = error
        if self.failure is None:
            self.failure = Failure(label, error, reason, span)

    # formulas and terms

    def _diag_fail(self, diags):
        for d in diags:
            if d.code == "unknown-symbol" and isinstance(d.subject, Const) and d.subject.name in self.eigens:
                raise _Fail(EIGEN_VIOLATION, f"eigen constant {d.subject.name} used outside its block")
        raise _Fail(SORT_ERROR, str(diags[0]))

    def check_formula(self, f, sig):
        diags = well_sorted(sig, f)
        if diags:
            self._diag_fail(diags)
        if free_vars(f):
            names = ", ".join(sorted(v.name for v in free_vars(f)))
            raise _Fail(SORT_ERROR, f"free variable(s) {names} in a proof line")

    def check_term(self, t, sig):
        if not isinstance(t, (Var, Const, App)):
            raise _Fail(RULE_MISMATCH, "expected a term argument")
        diags = well_sorted(sig, t)
        if diags:
            self._diag_fail(diags)
        if term_vars(t):
            raise _Fail(SORT_ERROR, f"term {format_term(t)} has free variables")
        return term_sort(sig, t)

    # references

    def lookup(self, ref):
        if not isinstance(ref, str):
            raise _Fail(RULE_MISMATCH, f"expected a line label, got block {ref}")
        for fr in reversed(self.frames):
            if ref in fr.lines:
                return fr.lines[ref]
        if ref in self.labels:
            raise _Fail(SCOPE_VIOLATION, f"line {ref} is not in scope here")
        raise _Fail(UNKNOWN_LABEL, f"no line labelled {ref}")

    def lookup_block(self, ref) -> _BlockInfo:
        if not isinstance(ref, BlockRef):
            raise _Fail(RULE_MISMATCH, f"expected a block reference, got line {ref}")
        for fr in reversed(self.frames):
            info = fr.blocks.get((ref.first, ref.last))
            if info is not None:
                if info.discharged_by is not None:
                    raise _Fail(SCOPE_VIOLATION, f"block {ref} was already discharged at {info.discharged_by}")
                if info.end is None:
                    raise _Fail(RULE_MISMATCH, f"block {ref} does not end in a line")
                return info
        for lab in (ref.first, ref.last):
            if lab not in self.labels:
                raise _Fail(UNKNOWN_LABEL, f"no line labelled {lab}")
        if (ref.first, ref.last) in self.spans:
            raise _Fail(SCOPE_VIOLATION, f"block {ref} is not in scope here")
        raise _Fail(RULE_MISMATCH, f"no block spans {ref}")

    def _shape(self, line, pattern):
        refs = line.just.refs
        if len(refs) != len(pattern):
            raise _Fail(RULE_MISMATCH, f"{line.just.rule} expects {len(pattern)} citation(s), got {len(refs)}")
        return [self.lookup(r) if p == "L" else self.lookup_block(r) for p, r in zip(pattern, refs)]

    def _no_extras(self, line, arg=False, named=False):
        j = line.just
        if j.arg is not None and not arg:
            raise _Fail(RULE_MISMATCH, f"{j.rule} takes no bracketed argument")
        if (j.name is not None or j.bindings) and not named:
            raise _Fail(RULE_MISMATCH, f"{j.rule} takes no name or bindings")

    def _open_hyps(self):
        return [fr.hyp for fr in self.frames if fr.hyp is not None]

    # driver

    def run(self) -> CheckReport:
        p = self.proof
        try:
            self.check_formula(p.goal, self.sig)
        except _Fail as e:
            self.fail(p.name, e.error, f"goal: {e.reason}")
        for ln in self.duplicates:
            self.fail(ln.label, SCOPE_VIOLATION, f"duplicate label {ln.label}", ln.span)
        body = p.body
        if body.hyp is not None:
            self.fail(body.hyp.label, OPEN_HYPOTHESIS,
                      "the outermost block may not open an assumption", body.hyp.span)
        self.block(body, self.sig)
        if self.failure is None:
            last = body.entries[-1] if body.entries else None
            if not hasattr(last, "formula"):
                self.fail(p.name, GOAL_MISMATCH, "proof does not end in a line")
            elif not alpha_eq(last.formula, p.goal):
                self.fail(last.label, GOAL_MISMATCH,
                          f"last line proves {format_formula(last.formula)}, goal is {format_formula(p.goal)}",
                          last.span)
        ok = self.failure is None
        return CheckReport(
            name=p.name,
            verdict="accepted" if ok else "rejected",
            lines=tuple(self.statuses.items()),
            failure=self.failure,
            classification=("classical" if self.classical else "constructive") if ok else None,
            discharges=dict(self.discharges),
        )

    def block(self, block: Block, sig) -> _BlockInfo:
        fr = _Frame(sig)
        first = block.first_label
        if block.eigen is not None:
            name, sort = block.eigen
            enclosing = {f.eigen for f in self.frames}
            if sort not in sig.sorts:
                self.fail(first, SORT_ERROR, f"eigen constant {name} has undeclared sort {sort!r}", block.span)
            elif name in sig.names() or name in enclosing:
                self.fail(first, EIGEN_VIOLATION, f"eigen constant {name} is not fresh", block.span)
            else:
                fr.sig = sig.add_constant(name, sort)
                fr.eigen = name
        self.frames.append(fr)
        if block.hyp is not None:
            h = block.hyp
            try:
                self.check_formula(h.formula, fr.sig)
                self.statuses[h.label] = "ok"
            except _Fail as e:
                self.fail(h.label, e.error, e.reason, h.span)
            fr.lines[h.label] = h.formula
            fr.hyp = h.formula
        for e in block.entries:
            if isinstance(e, Block):
                if e.hyp is None and e.eigen is None:
                    self.fail(e.first_label, RULE_MISMATCH,
                              "a nested block must open an assumption or an eigen constant", e.span)
                info = self.block(e, fr.sig)
                fr.blocks[(info.first, info.last)] = info
            else:
                self.line(e, fr)
        self.frames.pop()
        for info in fr.blocks.values():
            if info.discharged_by is None and info.hyp is not None:
                self.fail(info.hyp_label, OPEN_HYPOTHESIS,
                          f"assumption {info.hyp_label} is never discharged")
        end = None
        if block.entries:
            if not isinstance(block.entries[-1], Block):
                end = block.entries[-1].formula
        elif block.hyp is not None:
            end = block.hyp.formula
        return _BlockInfo(first, block.last_label, fr.hyp,
                          block.hyp.label if block.hyp is not None else None,
                          block.eigen, end)

    def line(self, line: Line, fr: _Frame):
        if self.failure is not None:
            # diagnostics only after the first failure
            try:
                self.check_formula(line.formula, fr.sig)
                self.statuses.setdefault(line.label, "unchecked")
            except _Fail as e:
                self.statuses[line.label] = e.error
            fr.lines[line.label] = line.formula
            return
        try:
            self.check_formula(line.formula, fr.sig)
            rule = line.just.rule
            handler = getattr(self, "r_" + rule, None) if rule in RULES else None
            if rule == "hyp":
                raise _Fail(RULE_MISMATCH, "hyp may only open a block (use assume)")
            if handler is None:
                raise _Fail(RULE_MISMATCH, f"unknown rule {rule!r}")
            handler(line, line.formula, fr.sig)
            self.statuses[line.label] = "ok"
        except _Fail as e:
            self.fail(line.label, e.error, e.reason, line.span)
        fr.lines[line.label] = line.formula

    def _discharge(self, info, line):
        info.discharged_by = line.label
        if info.hyp_label is not None:
            self.discharges[info.hyp_label] = (line.label, line.just.rule)

    # rules

    @staticmethod
    def _same(f, g, what):
        if not alpha_eq(f, g):
            raise _Fail(RULE_MISMATCH, f"{what}: expected {format_formula(g)}, found {format_formula(f)}")

    @staticmethod
    def _is(f, cls, what):
        if not isinstance(f, cls):
            raise _Fail(RULE_MISMATCH, f"{what} must be {cls.__name__.lower()}, got {format_formula(f)}")
        return f

    def _named(self, line, f, sig, table, kind):
        j = line.just
        if j.refs or j.arg is not None:
            raise _Fail(RULE_MISMATCH, f"{j.rule} cites no lines")
        if j.name not in table:
            raise _Fail(UNKNOWN_LABEL, f"unknown {kind} {j.name!r}")
        return table[j.name]

    def _inst(self, metas, body, line, sig):
        for _, v in line.just.bindings:
            if isinstance(v, Formula):
                self.check_formula(v, sig)
            else:
                self.check_term(v, sig)
        try:
            return instantiate_metas(metas, body, line.just.bindings, sig)
        except InstantiationError as e:
            raise _Fail(RULE_MISMATCH, str(e))
        except SortError as e:
            raise _Fail(SORT_ERROR, str(e))

    def r_axiom(self, line, f, sig):
        ax = self._named(line, f, sig, self.theory.axioms, "axiom")
        if line.just.bindings:
            raise _Fail(RULE_MISMATCH, "axioms take no bindings")
        self._same(f, ax, f"axiom {line.just.name}")

    def r_lemma(self, line, f, sig):
        lem = self._named(line, f, sig, self.theory.lemmas, "lemma")
        inst = self._inst(lem.metas, lem.statement, line, sig)
        self._same(f, inst, f"lemma {lem.name}")
        if lem.classical:
            self.classical = True

    def r_schema(self, line, f, sig):
        sch = self._named(line, f, sig, self.theory.schemata, "schema")
        inst = self._inst(sch.metas, sch.body, line, sig)
        self._same(f, inst, f"schema {line.just.name}")

    def r_and_i(self, line, f, sig):
        self._no_extras(line)
        a, b = self._shape(line, "LL")
        self._is(f, And, "conclusion of and_i")
        self._same(f.left, a, "left conjunct")
        self._same(f.right, b, "right conjunct")

    def r_and_e1(self, line, f, sig):
        self._no_extras(line)
        (a,) = self._shape(line, "L")
        self._is(a, And, "premise of and_e1")
        self._same(f, a.left, "and_e1")

    def r_and_e2(self, line, f, sig):
        self._no_extras(line)
        (a,) = self._shape(line, "L")
        self._is(a, And, "premise of and_e2")
        self._same(f, a.right, "and_e2")

    def _or_i(self, line, f, sig, side):
        self._no_extras(line, arg=True)
        (a,) = self._shape(line, "L")
        self._is(f, Or, f"conclusion of {line.just.rule}")
        kept, other = (f.left, f.right) if side == 1 else (f.right, f.left)
        self._same(kept, a, "introduced disjunct")
        if line.just.arg is not None:
            if not isinstance(line.just.arg, Formula):
                raise _Fail(RULE_MISMATCH, "the other disjunct must be a formula")
            self._same(other, line.just.arg, "supplied disjunct")

    def r_or_i1(self, line, f, sig):
        self._or_i(line, f, sig, 1)

    def r_or_i2(self, line, f, sig):
        self._or_i(line, f, sig, 2)

    def r_or_e(self, line, f, sig):
        self._no_extras(line)
        a, b1, b2 = self._shape(line, "LBB")
        self._is(a, Or, "premise of or_e")
        for b, disj, n in ((b1, a.left, 1), (b2, a.right, 2)):
            if b.hyp is None or b.eigen is not None:
                raise _Fail(RULE_MISMATCH, f"case {n} of or_e must assume a disjunct and fix nothing")
            self._same(b.hyp, disj, f"assumption of case {n}")
            self._same(b.end, f, f"conclusion of case {n}")
        self._discharge(b1, line)
        self._discharge(b2, line)

    def r_imp_i(self, line, f, sig):
        self._no_extras(line)
        (b,) = self._shape(line, "B")
        if b.hyp is None or b.eigen is not None:
            raise _Fail(RULE_MISMATCH, "imp_i needs a block that assumes something and fixes nothing")
        self._is(f, Implies, "conclusion of imp_i")
        self._same(f.left, b.hyp, "antecedent")
        self._same(f.right, b.end, "consequent")
        self._discharge(b, line)

    def r_imp_e(self, line, f, sig):
        self._no_extras(line)
        imp, ant = self._shape(line, "LL")
        self._is(imp, Implies, "first premise of imp_e")
        self._same(ant, imp.left, "minor premise")
        self._same(f, imp.right, "imp_e")

    def r_raa(self, line, f, sig):
        self._no_extras(line)
        (b,) = self._shape(line, "B")
        if b.hyp is None or b.eigen is not None:
            raise _Fail(RULE_MISMATCH, "raa needs a block that assumes something and fixes nothing")
        self._same(b.hyp, Not(f), "assumption of raa")
        self._same(b.end, FALSUM, "raa block")
        self.classical = True
        self._discharge(b, line)

    def r_all_i(self, line, f, sig):
        self._no_extras(line)
        (b,) = self._shape(line, "B")
        if b.eigen is None or b.hyp is not None:
            raise _Fail(RULE_MISMATCH, "all_i needs a block that fixes a constant and assumes nothing")
        self._is(f, Forall, "conclusion of all_i")
        c, sort = b.eigen
        if c in constants(f):
            raise _Fail(EIGEN_VIOLATION, f"eigen constant {c} occurs in the conclusion")
        if any(c in constants(h) for h in self._open_hyps()):
            raise _Fail(EIGEN_VIOLATION, f"eigen constant {c} occurs in an open assumption")
        if sort != f.sort:
            raise _Fail(SORT_ERROR, f"eigen constant {c} has sort {sort}, quantifier ranges over {f.sort}")
        self._same(b.end, instantiate(f, Const(c)), "all_i block")
        self._discharge(b, line)

    def r_all_e(self, line, f, sig):
        self._no_extras(line, arg=True)
        (a,) = self._shape(line, "L")
        self._is(a, Forall, "premise of all_e")
        if line.just.arg is None:
            raise _Fail(RULE_MISMATCH, "all_e needs an instance term")
        sort = self.check_term(line.just.arg, sig)
        if sort != a.sort:
            raise _Fail(SORT_ERROR, f"instance {format_term(line.just.arg)} has sort {sort}, expected {a.sort}")
        self._same(f, instantiate(a, line.just.arg), "all_e")

    def r_ex_i(self, line, f, sig):
        self._no_extras(line, arg=True)
        (a,) = self._shape(line, "L")
        self._is(f, Exists, "conclusion of ex_i")
        if line.just.arg is None:
            raise _Fail(RULE_MISMATCH, "ex_i needs a witness term")
        sort = self.check_term(line.just.arg, sig)
        if sort != f.sort:
            raise _Fail(SORT_ERROR, f"witness {format_term(line.just.arg)} has sort {sort}, expected {f.sort}")
        self._same(a, instantiate(f, line.just.arg), "ex_i premise")

    def r_ex_e(self, line, f, sig):
        self._no_extras(line)
        a, b = self._shape(line, "LB")
        self._is(a, Exists, "premise of ex_e")
        if b.eigen is None or b.hyp is None:
            raise _Fail(RULE_MISMATCH, "ex_e needs a block that fixes a constant and assumes its instance")
        c, sort = b.eigen
        if c in constants(f):
            raise _Fail(EIGEN_VIOLATION, f"eigen constant {c} occurs in the conclusion")
        if c in constants(a):
            raise _Fail(EIGEN_VIOLATION, f"eigen constant {c} occurs in the existential premise")
        if any(c in constants(h) for h in self._open_hyps()):
            raise _Fail(EIGEN_VIOLATION, f"eigen constant {c} occurs in an open assumption")
        if sort != a.sort:
            raise _Fail(SORT_ERROR, f"eigen constant {c} has sort {sort}, quantifier ranges over {a.sort}")
        self._same(b.hyp, instantiate(a, Const(c)), "assumption of ex_e block")
        self._same(b.end, f, "conclusion of ex_e block")
        self._discharge(b, line)

    def r_reit(self, line, f, sig):
        self._no_extras(line)
        (a,) = self._shape(line, "L")
        self._same(f, a, "reit")


def check_proof(theory: Theory, proof: Proof) -> CheckReport:
    """Check ``proof`` against ``theory``; never raises on a bad proof."""
    try:
        sig = meta_signature(theory.signature, proof.metas)
    except SignatureError as e:
        return CheckReport(proof.name, "rejected", (), Failure(proof.name, SORT_ERROR, str(e)))
    return _Checker(theory, proof, sig).run()


def classify_proof(theory: Theory, proof: Proof) -> str:
    """``"classical"`` if the proof (or a lemma it cites, transitively) uses raa."""
    report = check_proof(theory, proof)
    if not report.accepted:
        raise ProofRejected(report)
    return report.classification


def register_lemma(theory: Theory, name: str, proof: Proof) -> Theory:
    """Return ``theory`` extended with a checked lemma citable as ``name``."""
    if name in theory.axioms or name in theory.schemata or name in theory.lemmas:
        raise ValueError(f"duplicate name {name!r}")
    report = check_proof(theory, proof)
    if not report.accepted:
        raise ProofRejected(report)
    lemma = Lemma(name, proof.goal, proof, tuple(proof.metas), report.classification == "classical")
    return Theory(theory.signature, theory.axioms, theory.schemata, {**theory.lemmas, name: lemma})
