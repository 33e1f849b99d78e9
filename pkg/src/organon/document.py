"""Turn a parsed document into a theory and check its proofs in order."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .kernel import (
    SORT_ERROR, Block, CheckReport, Failure, Lemma, Theory, check_proof,
)
from .logic import SignatureError, SortError
from .script import (
    AxiomDecl, ConstDecl, FnDecl, LemmaDecl, PredDecl, SchemaDecl, SortDecl, Document,
    parse_document,
)


@dataclass
class CheckedDocument:
    document: Document
    theory: Theory
    reports: list = field(default_factory=list)
    # theory in force when each proof or lemma was checked
    context: dict = field(default_factory=dict)

    @property
    def accepted(self):
        return all(r.accepted for r in self.reports)

    def report(self, name):
        return next((r for r in self.reports if r.name == name), None)

    def first_failure(self):
        return next((r for r in self.reports if not r.accepted), None)


def _decl_failure(d, reason):
    return CheckReport(d.name, "rejected", ((d.name, SORT_ERROR),),
                       Failure(d.name, SORT_ERROR, reason, d.span))


def check_document(doc: Document) -> CheckedDocument:
    """Build the theory declared by ``doc`` and check every lemma and proof.

    Declarations are processed top to bottom, so a proof sees exactly the
    axioms, schemata and lemmas declared above it.  A lemma whose proof is
    rejected is not registered.
    """
    theory = Theory()
    out = CheckedDocument(doc, theory)
    for d in doc.decls:
        sig = theory.signature
        try:
            if isinstance(d, SortDecl):
                theory = theory.with_signature(sig.add_sort(d.name))
            elif isinstance(d, PredDecl):
                theory = theory.with_signature(sig.add_predicate(d.name, d.sorts))
            elif isinstance(d, FnDecl):
                theory = theory.with_signature(sig.add_function(d.name, d.args, d.result))
            elif isinstance(d, ConstDecl):
                theory = theory.with_signature(sig.add_constant(d.name, d.sort))
            elif isinstance(d, AxiomDecl):
                theory = theory.add_axiom(d.name, d.formula)
            elif isinstance(d, SchemaDecl):
                theory = theory.add_schema(d.name, d.schema)
        except (SignatureError, SortError, ValueError) as e:
            out.reports.append(_decl_failure(d, str(e)))
            continue
        if isinstance(d, LemmaDecl):
            report = check_proof(theory, d.proof)
            out.reports.append(report)
            out.context[d.name] = theory
            if report.accepted and d.kind == "lemma":
                lemma = Lemma(d.name, d.goal, d.proof, d.metas, report.classification == "classical")
                theory = Theory(theory.signature, theory.axioms, theory.schemata,
                                {**theory.lemmas, d.name: lemma})
    out.theory = theory
    return out


def load(path) -> CheckedDocument:
    path = Path(path)
    return check_document(parse_document(path.read_text(encoding="utf-8"), str(path)))


def proofs(doc: Document):
    return [d for d in doc.decls if isinstance(d, LemmaDecl)]


def _drop_citations(block: Block, rule, name) -> Block:
    entries = []
    for e in block.entries:
        if isinstance(e, Block):
            entries.append(_drop_citations(e, rule, name))
        elif not (e.just.rule == rule and e.just.name == name):
            entries.append(e)
    return replace(block, entries=tuple(entries))


def drop_axiom(doc: Document, name) -> Document:
    """``doc`` without axiom ``name`` and without the lines that cite it."""
    decls = []
    for d in doc.decls:
        if isinstance(d, AxiomDecl) and d.name == name:
            continue
        if isinstance(d, LemmaDecl):
            d = replace(d, body=_drop_citations(d.body, "axiom", name))
        decls.append(d)
    return Document(tuple(decls), doc.file)
