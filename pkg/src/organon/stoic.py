"""Substructural sequent checking and hypothesis relevance.

Sequents are ``premises |- conclusion`` with premises kept as an ordered
multiset: order only matters for locating a cut position, and two sequents
are equal when their premise multisets and conclusions coincide.  There is
no weakening and no contraction; new sequents come only from base
sequents, instances of indemonstrable schemata, and cut::

    Gamma |- C    Delta |- A    (A at position k of Gamma)
    -------------------------------------------------------
          Gamma with position k replaced by Delta |- C
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

from .kernel import Block, BlockRef, ProofRejected, check_proof
from .logic import (
    Atom, Binary, Falsum, Formula, Quant, alpha_eq, format_formula, free_vars, replace_symbols,
)
from .script import DeriveDecl, IndemDecl, SequentDecl, parse_document

UNKNOWN_BASE = "unknown_base"
UNKNOWN_STEP = "unknown_step"
UNKNOWN_INDEMONSTRABLE = "unknown_indemonstrable"
PREMISE_MISMATCH = "premise_mismatch"
NON_PROPOSITIONAL = "non_propositional"
SCHEMA_MISMATCH = "schema_mismatch"
SEQUENT_MISMATCH = "sequent_mismatch"


@dataclass(frozen=True)
class Sequent:
    premises: tuple
    conclusion: Formula

    def key(self):
        return (frozenset(Counter(self.premises).items()), self.conclusion)

    def same(self, other) -> bool:
        return self.key() == other.key()

    def __str__(self):
        prem = ", ".join(format_formula(p) for p in self.premises)
        return f"{prem} |- {format_formula(self.conclusion)}".lstrip()


@dataclass(frozen=True)
class Indemonstrable:
    name: str
    metas: tuple
    premises: tuple
    conclusion: Formula


def is_propositional(f) -> bool:
    if isinstance(f, Quant):
        return False
    if isinstance(f, Binary):
        return is_propositional(f.left) and is_propositional(f.right)
    if isinstance(f, Atom):
        return not free_vars(f)
    return isinstance(f, Falsum)


def cut(upper: Sequent, lower: Sequent, position: int = None) -> Sequent:
    """Replace one occurrence of ``lower.conclusion`` among ``upper``'s
    premises by ``lower``'s premises.  ``position`` is 1-based; by default
    the first occurrence is used."""
    prem = list(upper.premises)
    a = lower.conclusion
    if position is None:
        hits = [i for i, p in enumerate(prem) if p == a]
        if not hits:
            raise ValueError(f"{format_formula(a)} is not a premise of {upper}")
        k = hits[0]
    else:
        k = position - 1
        if not 0 <= k < len(prem):
            raise ValueError(f"{upper} has no premise at position {position}")
        if prem[k] != a:
            raise ValueError(f"premise {position} of {upper} is {format_formula(prem[k])}, "
                             f"not {format_formula(a)}")
    return Sequent(tuple(prem[:k]) + tuple(lower.premises) + tuple(prem[k + 1:]), upper.conclusion)


# -- schema matching -------------------------------------------------------

def _match(pattern, f, metas, sigma) -> bool:
    if isinstance(pattern, Atom) and not pattern.args and pattern.pred in metas:
        bound = sigma.get(pattern.pred)
        if bound is None:
            sigma[pattern.pred] = f
            return True
        return alpha_eq(bound, f)
    if type(pattern) is not type(f):
        return False
    if isinstance(pattern, Binary):
        return _match(pattern.left, f.left, metas, sigma) and _match(pattern.right, f.right, metas, sigma)
    return pattern == f


def match_indemonstrable(ind: Indemonstrable, s: Sequent):
    """A binding of ``ind``'s metavariables producing ``s``, or None.

    Premises are matched as a multiset: any ordering of ``s``'s premises
    may line up with the schema's."""
    if len(ind.premises) != len(s.premises):
        return None
    metas = {m.name for m in ind.metas}
    for perm in itertools.permutations(s.premises):
        sigma = {}
        if not _match(ind.conclusion, s.conclusion, metas, sigma):
            return None
        if all(_match(p, q, metas, sigma) for p, q in zip(ind.premises, perm)):
            return sigma
    return None


def _instances(ind: Indemonstrable, pool):
    names = [m.name for m in ind.metas]
    for values in itertools.product(pool, repeat=len(names)):
        atoms = dict(zip(names, values))
        yield Sequent(tuple(replace_symbols(p, atoms=atoms) for p in ind.premises),
                      replace_symbols(ind.conclusion, atoms=atoms))


# -- configuration ---------------------------------------------------------

def indemonstrables_from_text(text, file="<indemonstrables>"):
    doc = parse_document(text, file)
    return {d.name: Indemonstrable(d.name, d.metas, d.premises, d.conclusion)
            for d in doc.decls if isinstance(d, IndemDecl)}


def _bundled(name):
    return resources.files("organon").joinpath("data", name).read_text(encoding="utf-8")


def default_indemonstrables(xor_complement=False):
    """The bundled schema set, optionally with the exclusive-or complement."""
    out = indemonstrables_from_text(_bundled("indemonstrables.anc"), "indemonstrables.anc")
    if xor_complement:
        out.update(indemonstrables_from_text(_bundled("xor_complement.anc"), "xor_complement.anc"))
    return out


# -- derivations -----------------------------------------------------------

@dataclass(frozen=True)
class StepFailure:
    label: str
    error: str
    reason: str
    span: object = field(default=None, compare=False)

    def __str__(self):
        return f"{self.label}: {self.error}: {self.reason}"


@dataclass(frozen=True)
class DerivationReport:
    name: str
    verdict: str
    steps: tuple
    failure: StepFailure = None
    derived: tuple = ()

    @property
    def accepted(self):
        return self.verdict == "accepted"

    def to_dict(self):
        out = {"name": self.name, "verdict": self.verdict,
               "steps": [{"label": lab, "status": st} for lab, st in self.steps],
               "derived": [{"label": lab, "sequent": str(s)} for lab, s in self.derived],
               "failure": None}
        if self.failure is not None:
            f = self.failure
            out["failure"] = {"label": f.label, "error": f.error, "reason": f.reason}
            if f.span is not None:
                out["failure"]["span"] = f.span.to_dict()
        return out


class _StepError(Exception):
    def __init__(self, error, reason):
        super().__init__(reason)
        self.error = error
        self.reason = reason


def _step_sequent(step):
    return Sequent(tuple(step.premises), step.conclusion)


def check_derivation(base, steps, indemonstrables=None, name="derivation") -> DerivationReport:
    """Check ``steps`` (script ``Step`` values) against named base sequents.

    Stops at the first failing step; every step's claimed sequent is
    compared to what its rule actually yields, up to premise order.
    """
    if indemonstrables is None:
        indemonstrables = default_indemonstrables()
    proved = {}
    statuses, derived = [], []
    failure = None
    for step in steps:
        if failure is not None:
            statuses.append((step.label, "unchecked"))
            continue
        claim = _step_sequent(step)
        try:
            for f in (*claim.premises, claim.conclusion):
                if not is_propositional(f):
                    raise _StepError(NON_PROPOSITIONAL, f"{format_formula(f)} is not propositional")
            if step.rule == "base":
                if step.name not in base:
                    raise _StepError(UNKNOWN_BASE, f"no base sequent named {step.name}")
                got = base[step.name]
                for f in (*got.premises, got.conclusion):
                    if not is_propositional(f):
                        raise _StepError(NON_PROPOSITIONAL, f"base {step.name} is not propositional")
            elif step.rule == "indem":
                ind = indemonstrables.get(step.name)
                if ind is None:
                    raise _StepError(UNKNOWN_INDEMONSTRABLE, f"no indemonstrable named {step.name}")
                if match_indemonstrable(ind, claim) is None:
                    raise _StepError(SCHEMA_MISMATCH, f"{claim} is not an instance of {step.name}")
                got = claim
            elif step.rule == "cut":
                i, j = step.refs
                for r in (i, j):
                    if r not in proved:
                        raise _StepError(UNKNOWN_STEP, f"no earlier step labelled {r}")
                try:
                    got = cut(proved[i], proved[j], step.position)
                except ValueError as e:
                    raise _StepError(PREMISE_MISMATCH, str(e))
            else:
                raise _StepError(SCHEMA_MISMATCH, f"unknown rule {step.rule}")
            if not got.same(claim):
                raise _StepError(SEQUENT_MISMATCH, f"step yields {got}, not {claim}")
            proved[step.label] = claim
            derived.append((step.label, claim))
            statuses.append((step.label, "ok"))
        except _StepError as e:
            failure = StepFailure(step.label, e.error, e.reason, step.span)
            statuses.append((step.label, e.error))
    return DerivationReport(name, "accepted" if failure is None else "rejected",
                            tuple(statuses), failure, tuple(derived))


def base_of(doc):
    return {d.name: Sequent(d.premises, d.conclusion) for d in doc.decls if isinstance(d, SequentDecl)}


def check_stoic_document(doc, xor_complement=False):
    """Check every ``derive`` declaration of ``doc``; returns reports in order."""
    indems = default_indemonstrables(xor_complement)
    for d in doc.decls:
        if isinstance(d, IndemDecl):
            indems[d.name] = Indemonstrable(d.name, d.metas, d.premises, d.conclusion)
    base = base_of(doc)
    return [check_derivation(base, d.steps, indems, d.name)
            for d in doc.decls if isinstance(d, DeriveDecl)]


def _subformulas(f, out):
    out.add(f)
    if isinstance(f, Binary):
        _subformulas(f.left, out)
        _subformulas(f.right, out)


def derivable(base, target: Sequent, indemonstrables=None, max_premises=None, max_rounds=6) -> bool:
    """Bounded search: is ``target`` reachable from ``base`` by schema
    instances and cuts?

    Schema metavariables range over subformulas of the target and the base;
    intermediate sequents are capped at ``max_premises`` premises (default:
    two more than the target has).  A negative answer is only relative to
    these bounds.
    """
    if indemonstrables is None:
        indemonstrables = default_indemonstrables()
    pool = set()
    for s in list(base.values()) + [target]:
        for f in (*s.premises, s.conclusion):
            _subformulas(f, pool)
    pool = sorted(pool, key=format_formula)
    if max_premises is None:
        max_premises = len(target.premises) + 2
    known = {}
    for s in base.values():
        known[s.key()] = s
    for ind in indemonstrables.values():
        for s in _instances(ind, pool):
            if len(s.premises) <= max_premises:
                known.setdefault(s.key(), s)
    for _ in range(max_rounds):
        if target.key() in known:
            return True
        fresh = {}
        seqs = list(known.values())
        for upper in seqs:
            for lower in seqs:
                if len(upper.premises) - 1 + len(lower.premises) > max_premises:
                    continue
                for k, p in enumerate(upper.premises):
                    if p == lower.conclusion:
                        s = cut(upper, lower, k + 1)
                        if s.key() not in known:
                            fresh.setdefault(s.key(), s)
        if not fresh:
            break
        known.update(fresh)
    return target.key() in known


# -- relevance of kernel proofs --------------------------------------------

@dataclass(frozen=True)
class RelevanceReport:
    name: str
    unused: frozenset
    classical: bool

    @property
    def used(self):
        return not self.unused and not self.classical

    @property
    def in_fragment(self):
        return not self.classical

    def to_dict(self):
        return {"name": self.name, "used": self.used, "unused": sorted(self.unused),
                "in_fragment": self.in_fragment}


def _citations(block, edges):
    for e in block.entries:
        if isinstance(e, Block):
            _citations(e, edges)
        else:
            edges[e.label] = tuple(e.just.refs)


def relevance_check(theory, proof) -> RelevanceReport:
    """Which assumptions does the final line actually depend on?

    Walks citations backwards from the last line; a block citation reaches
    the block's final line.  Raises ProofRejected for a proof the kernel
    does not accept.
    """
    report = check_proof(theory, proof)
    if not report.accepted:
        raise ProofRejected(report)
    edges = {}
    _citations(proof.body, edges)
    hyps = {b.hyp.label for b in proof.body.blocks() if b.hyp is not None}
    seen = set()
    todo = [proof.body.last_label]
    while todo:
        lab = todo.pop()
        if lab in seen:
            continue
        seen.add(lab)
        for r in edges.get(lab, ()):
            todo.append(r.last if isinstance(r, BlockRef) else r)
    return RelevanceReport(proof.name, frozenset(hyps - seen), report.classification == "classical")
