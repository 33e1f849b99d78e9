from dataclasses import replace

import re

import pytest

from organon.document import check_document
from organon.kernel import (
    EIGEN_VIOLATION, GOAL_MISMATCH, OPEN_HYPOTHESIS, RULE_MISMATCH, SCOPE_VIOLATION, SORT_ERROR,
    UNKNOWN_LABEL, Block, Meta, ProofRejected, Schema, check_proof,
    classify_proof, instantiate_schema, register_lemma,
)
from organon.logic import (
    And, Atom, Const, Exists, FALSUM, Forall, Implies, Not, Or, Var, apply_subst, constants, eq,
)
from organon.script import (
    AxiomDecl, Document, LemmaDecl, PredDecl, SortDecl, parse_document,
    render_document,
)

from conftest import CORPUS_FILES, corpus_text

HEAD = """sort s
pred A()
pred B()
pred C()
pred P(s)
pred Q(s)
const a : s
"""


def check(body, extra=""):
    """Check the last proof of a small script; returns its report."""
    checked = check_document(parse_document(HEAD + extra + body, "t.anc"))
    return checked.reports[-1]


def rejects(body, error, label=None, extra=""):
    r = check(body, extra)
    assert not r.accepted, "expected a rejection"
    assert r.failure.error == error, str(r.failure)
    if label is not None:
        assert r.failure.label == label
    return r


# -- rule contracts --------------------------------------------------------

def test_and_rules_and_imp_i():
    r = check("""proof p : A & B -> B & A {
  {
    assume h : A & B;
    l1 : A by and_e1 h;
    l2 : B by and_e2 h;
    l3 : B & A by and_i l2, l1;
  }
  l4 : A & B -> B & A by imp_i h-l3;
}""")
    assert r.accepted and r.classification == "constructive"
    assert r.discharges == {"h": ("l4", "imp_i")}


def test_and_i_order_matters():
    rejects("""proof p : A -> B -> A & B {
  { assume h1 : A;
    { assume h2 : B;
      l1 : A & B by and_i h2, h1;
    }
    l2 : B -> A & B by imp_i h2-l1;
  }
  l3 : A -> B -> A & B by imp_i h1-l2;
}""", RULE_MISMATCH, "l1")


def test_or_introduction_and_elimination():
    r = check("""proof p : A | B -> B | A {
  { assume h : A | B;
    { assume h1 : A;
      l1 : B | A by or_i2 h1 [B];
    }
    { assume h2 : B;
      l2 : B | A by or_i1 h2 [A];
    }
    l3 : B | A by or_e h, h1-l1, h2-l2;
  }
  l4 : A | B -> B | A by imp_i h-l3;
}""")
    assert r.accepted
    assert r.discharges == {"h": ("l4", "imp_i"), "h1": ("l3", "or_e"), "h2": ("l3", "or_e")}


def test_or_e_branches_must_agree():
    rejects("""proof p : A | B -> A {
  { assume h : A | B;
    { assume h1 : A;
      l1 : A by reit h1;
    }
    { assume h2 : B;
      l2 : B by reit h2;
    }
    l3 : A by or_e h, h1-l1, h2-l2;
  }
  l4 : A | B -> A by imp_i h-l3;
}""", RULE_MISMATCH, "l3")


def test_imp_e_and_raa_is_classical():
    r = check("""proof dne : ~~A -> A {
  { assume h : ~~A;
    { assume n : ~A;
      l1 : false by imp_e h, n;
    }
    l2 : A by raa n-l1;
  }
  l3 : ~~A -> A by imp_i h-l2;
}""")
    assert r.accepted and r.classification == "classical"
    assert r.discharges["n"] == ("l2", "raa")


def test_raa_needs_negated_conclusion():
    rejects("""proof p : ~~A -> B {
  { assume h : ~~A;
    { assume n : ~A;
      l1 : false by imp_e h, n;
    }
    l2 : B by raa n-l1;
  }
  l3 : ~~A -> B by imp_i h-l2;
}""", RULE_MISMATCH, "l2")


QUANT = "axiom allP : all x:s. P(x);\naxiom allQ : all x:s. Q(x);\naxiom someP : ex x:s. P(x);\n"


def test_all_i_all_e():
    r = check("""proof p : all x:s. P(x) & Q(x) {
  l0 : all x:s. P(x) by axiom allP;
  l1 : all x:s. Q(x) by axiom allQ;
  {
    fix c : s;
    l2 : P(c) by all_e l0 [c];
    l3 : Q(c) by all_e l1 [c];
    l4 : P(c) & Q(c) by and_i l2, l3;
  }
  l5 : all x:s. P(x) & Q(x) by all_i l2-l4;
}""", QUANT)
    assert r.accepted


def test_all_i_eigen_in_open_hypothesis():
    rejects("""proof p : P(a) -> all x:s. P(x) {
  { assume h : P(a);
    {
      fix a2 : s;
      l1 : P(a) by reit h;
    }
    l2 : all x:s. P(x) by all_i l1-l1;
  }
  l3 : P(a) -> all x:s. P(x) by imp_i h-l2;
}""", RULE_MISMATCH, "l2")
    # an eigen constant must be fresh, so reusing one in a nested block fails
    # at the first line that would see both
    rejects("""proof p : all y:s. P(y) -> all x:s. P(x) {
  {
    fix c : s;
    { assume h : P(c);
      {
        fix c : s;
        l1 : P(c) by reit h;
      }
      l2 : all x:s. P(x) by all_i l1-l1;
    }
    l3 : P(c) -> all x:s. P(x) by imp_i h-l2;
  }
  l4 : all y:s. P(y) -> all x:s. P(x) by all_i h-l3;
}""", EIGEN_VIOLATION, "l1")


def test_all_e_sort_error():
    rejects("""proof p : P(a) {
  l0 : all x:s. P(x) by axiom allP;
  l1 : P(a) by all_e l0 [nosuch];
}""", SORT_ERROR, "l1", QUANT)


def test_ex_i_ex_e():
    r = check("""proof p : ex y:s. P(y) | Q(y) {
  l0 : ex x:s. P(x) by axiom someP;
  {
    fix n : s;
    assume h : P(n);
    l1 : P(n) | Q(n) by or_i1 h [Q(n)];
    l2 : ex y:s. P(y) | Q(y) by ex_i l1 [n];
  }
  l3 : ex y:s. P(y) | Q(y) by ex_e l0, h-l2;
}""", QUANT)
    assert r.accepted and r.discharges == {"h": ("l3", "ex_e")}


def test_ex_i_witness_must_match():
    rejects("""proof p : ex y:s. P(y) {
  l0 : all x:s. P(x) by axiom allP;
  l1 : P(a) by all_e l0 [a];
  l2 : ex y:s. Q(y) by ex_i l1 [a];
}""", RULE_MISMATCH, "l2", QUANT)


def test_reit_and_scope():
    rejects("""proof p : A -> A {
  { assume h : A;
    l1 : A by reit h;
  }
  l2 : A by reit l1;
  l3 : A -> A by imp_i h-l1;
}""", SCOPE_VIOLATION, "l2")


def test_unknown_label():
    rejects("""proof p : A -> A {
  { assume h : A;
    l1 : A by reit zz;
  }
  l2 : A -> A by imp_i h-l1;
}""", UNKNOWN_LABEL, "l1")


def test_block_discharged_twice():
    rejects("""proof p : A -> A {
  { assume h : A;
    l1 : A by reit h;
  }
  l2 : A -> A by imp_i h-l1;
  l3 : A -> A by imp_i h-l1;
}""", SCOPE_VIOLATION, "l3")


def test_open_hypothesis_at_goal():
    rejects("""proof p : A {
  { assume h : A;
    l1 : A by reit h;
  }
}""", OPEN_HYPOTHESIS)


def test_goal_mismatch():
    rejects("""proof p : A -> B {
  { assume h : A;
    l1 : A by reit h;
  }
  l2 : A -> A by imp_i h-l1;
}""", GOAL_MISMATCH)


def test_axiom_citation_must_match_statement():
    rejects("""proof p : all x:s. Q(x) {
  l1 : all x:s. Q(x) by axiom allP;
}""", RULE_MISMATCH, "l1", QUANT)


def test_darapti_eigen_leak_into_conclusion():
    text = corpus_text("darapti_ekthesis.anc")
    text = text.replace("l6 : ex x:ind. P(x) & Q(x) by ex_i l5 [n];", "l6 : P(n) & Q(n) by reit l5;")
    text = text.replace("l7 : ex x:ind. P(x) & Q(x) by ex_e", "l7 : P(n) & Q(n) by ex_e")
    checked = check_document(parse_document(text))
    f = checked.first_failure().failure
    assert (f.label, f.error) == ("l7", EIGEN_VIOLATION)


def test_unchecked_lines_still_sort_checked():
    r = check("""proof p : A -> A {
  { assume h : A;
    l1 : A by reit zz;
    l2 : Nope(a) by reit h;
  }
  l3 : A -> A by imp_i h-l1;
}""")
    statuses = dict(r.lines)
    assert statuses["l1"] == UNKNOWN_LABEL
    assert statuses["l2"] == SORT_ERROR


# -- schemata and lemmas ---------------------------------------------------

def test_instantiate_mp_schema():
    A_, B_ = Atom("A", ()), Atom("B", ())
    mp = Schema((Meta("A", "formula"), Meta("B", "formula")), Implies(And(Implies(A_, B_), A_), B_))
    Pc, Qc = Atom("P", (Const("c"),)), Atom("Q", (Const("c"),))
    got = instantiate_schema(mp, {"A": Pc, "B": Qc})
    assert got == Implies(And(Implies(Pc, Qc), Pc), Qc)


def test_instantiate_h1_schema():
    doc = parse_document(corpus_text("h1_topic.anc"))
    s = doc.find("h1").schema
    p, q, r = Const("p"), Const("q"), Const("r")
    assert instantiate_schema(s, {"a": p, "b": q, "c": r}) == Implies(And(eq(r, p), eq(r, q)), eq(p, q))


def test_instantiate_schema_without_metas_and_errors():
    body = Atom("A", ())
    assert instantiate_schema(Schema((), body), {}) == body
    s = Schema((Meta("A", "formula"),), body)
    with pytest.raises(ValueError):
        instantiate_schema(s, {})
    with pytest.raises(ValueError):
        instantiate_schema(s, {"A": Const("c")})


def test_schema_closure_is_universal():
    doc = parse_document(corpus_text("h1_topic.anc"))
    closure = doc.find("h1").schema.closure()
    assert isinstance(closure, Forall)
    assert constants(closure) == set()


def _econv():
    return parse_document(corpus_text("econv.anc"))


def test_register_lemma_then_cite():
    doc = _econv()
    checked = check_document(doc)
    assert checked.accepted
    assert "negall_ab" in checked.theory.lemmas
    base = checked.context["negall_ab"]
    t2 = register_lemma(base, "negall_ab", doc.find("negall_ab").proof)
    assert check_proof(t2, doc.find("econv").proof).accepted
    # without the lemma the citation is unknown
    assert check_proof(base, doc.find("econv").proof).failure.error == UNKNOWN_LABEL


def test_register_rejected_lemma_leaves_theory_alone():
    doc = _econv()
    base = check_document(doc).context["negall_ab"]
    bad = doc.find("negall_ab").proof
    bad = replace(bad, goal=Not(bad.goal))
    with pytest.raises(ProofRejected):
        register_lemma(base, "negall_ab", bad)
    assert "negall_ab" not in base.lemmas


def test_register_duplicate_name():
    doc = _econv()
    t = check_document(doc).theory
    with pytest.raises(ValueError):
        register_lemma(t, "negall_ab", doc.find("negall_ab").proof)


def test_mt_lemma_cited_in_h1():
    checked = check_document(parse_document(corpus_text("h1_topic.anc")))
    assert checked.report("mt").accepted
    assert checked.report("h1_derived").accepted


def test_classify_examples():
    checked = check_document(_econv())
    assert classify_proof(checked.context["econv"], _econv().find("econv").proof) == "classical"
    dar = parse_document(corpus_text("darapti_ekthesis.anc"))
    t = check_document(dar).context["darapti"]
    assert classify_proof(t, dar.find("darapti").proof) == "constructive"
    one = parse_document(HEAD + "axiom ax : A;\nproof p : A {\n  l1 : A by axiom ax;\n}\n")
    assert check_document(one).reports[0].classification == "constructive"


def test_classification_inherits_from_cited_lemmas():
    doc = _econv()
    r = check_document(doc).report("econv")
    # econv itself contains raa and cites a classical lemma
    assert r.classification == "classical"
    # a proof with no raa of its own, citing the classical lemma, is classical too
    text = corpus_text("econv.anc") + """proof again : ~(all x:ind. A(x) -> ~B(x)) -> ex x:ind. A(x) & B(x) {
  l1 : ~(all x:ind. A(x) -> ~B(x)) -> ex x:ind. A(x) & B(x) by lemma negall_ab;
}
"""
    assert check_document(parse_document(text)).report("again").classification == "classical"


def test_classify_unchecked_proof_raises():
    doc = _econv()
    t = check_document(doc).context["econv"]
    bad = replace(doc.find("econv").proof, goal=Atom("A", ()))
    with pytest.raises(ProofRejected):
        classify_proof(t, bad)


# -- invariants over the corpus --------------------------------------------

@pytest.mark.parametrize("name", CORPUS_FILES)
def test_discharge_exactness(name):
    doc = parse_document(corpus_text(name))
    checked = check_document(doc)
    for d in doc.decls:
        if not isinstance(d, LemmaDecl):
            continue
        hyps = [b.hyp.label for b in d.body.blocks() if b.hyp is not None]
        if d.body.hyp is not None:
            hyps.append(d.body.hyp.label)
        r = checked.report(d.name)
        assert sorted(r.discharges) == sorted(hyps)
        # every discharging line uses a block-citing rule
        assert {rule for _, rule in r.discharges.values()} <= {"imp_i", "raa", "or_e", "ex_e", "all_i"}


def _eigen_homes(body, name):
    """ids of lines inside any block that fixes ``name``."""
    return {id(ln) for b in body.blocks() if b.eigen and b.eigen[0] == name for ln in b.lines()}


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_eigen_constants_stay_in_their_blocks(name):
    doc = parse_document(corpus_text(name))
    for d in doc.decls:
        if not isinstance(d, LemmaDecl):
            continue
        for b in d.body.blocks():
            if b.eigen is None:
                continue
            c = b.eigen[0]
            home = _eigen_homes(d.body, c)
            assert all(c not in constants(ln.formula) for ln in d.body.lines() if id(ln) not in home)
            assert c not in constants(d.goal)


def _rename_formula(f, k=0):
    if isinstance(f, (Forall, Exists)):
        new = f"r{k}"
        body = apply_subst(f.body, {f.bound: Var(new, f.sort)})
        return type(f)(new, f.sort, _rename_formula(body, k + 1))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_rename_formula(f.left, k + 10), _rename_formula(f.right, k + 20))
    return f


def _rename_block(block):
    hyp = block.hyp
    if hyp is not None:
        hyp = replace(hyp, formula=_rename_formula(hyp.formula))
    entries = []
    for e in block.entries:
        if isinstance(e, Block):
            entries.append(_rename_block(e))
        else:
            just = e.just
            if just.rule in ("or_i1", "or_i2"):
                just = replace(just, arg=_rename_formula(just.arg))
            entries.append(replace(e, formula=_rename_formula(e.formula), just=just))
    return replace(block, hyp=hyp, entries=tuple(entries))


def _rename_document(doc):
    out = []
    for d in doc.decls:
        if isinstance(d, LemmaDecl):
            d = replace(d, goal=_rename_formula(d.goal), body=_rename_block(d.body))
        elif isinstance(d, AxiomDecl):
            d = replace(d, formula=_rename_formula(d.formula))
        out.append(d)
    return Document(tuple(out), doc.file)


def _verdicts(doc):
    return [(r.name, r.verdict, r.failure.error if r.failure else None)
            for r in check_document(doc).reports]


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_alpha_robustness(name):
    doc = parse_document(corpus_text(name))
    assert _verdicts(_rename_document(doc)) == _verdicts(doc)


def test_alpha_robustness_on_rejected_mutants():
    from organon.mutate import mutate
    text = corpus_text("econv.anc")
    for m in mutate(text, 3, 12):
        if m.kind == "delete_brace":
            continue
        doc = parse_document(m.text)
        assert _verdicts(_rename_document(doc)) == _verdicts(doc)


EXTRA = (SortDecl("zz"), PredDecl("Zed", ("zz",)),
         AxiomDecl("unused_all", Forall("x", "zz", Atom("Zed", (Var("x", "zz"),)))),
         AxiomDecl("unused_false", FALSUM))


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_monotonicity(name):
    doc = parse_document(corpus_text(name))
    bigger = Document(EXTRA + doc.decls, doc.file)
    assert _verdicts(bigger) == _verdicts(doc)


# -- lemma inlining --------------------------------------------------------

def _inline_negall(text):
    """Splice the proof of negall_ab into econv in place of the citing line.

    The copy's labels get an ``i_`` prefix and its last line takes over the
    citing line's label, so later references still resolve.
    """
    lines = text.split("\n")
    start = next(i for i, ln in enumerate(lines) if ln.startswith("lemma negall_ab"))
    end = next(i for i in range(start, len(lines)) if lines[i] == "}")
    body = [re.sub(r"\bn(\d+)\b", r"i_n\1", ln) for ln in lines[start + 1:end]]
    body = [ln.replace("i_n13 :", "l3a :") for ln in body]
    site = next(i for i, ln in enumerate(lines) if "by lemma negall_ab" in ln)
    return "\n".join(lines[:site] + body + lines[site + 1:])


def test_lemma_inlining_preserves_acceptance():
    text = _inline_negall(corpus_text("econv.anc"))
    assert "by lemma" not in text.split("proof econv")[1]
    r = check_document(parse_document(text)).report("econv")
    assert r.accepted and r.classification == "classical"
    assert {"l2", "i_n1", "i_n2", "i_n3", "i_n4"} <= set(r.discharges)


def test_lemma_inlining_preserves_verdicts_of_mutants():
    from organon.mutate import mutate
    text = render_document(parse_document(corpus_text("econv.anc")))
    site = next(ln for ln in text.split("\n") if "by lemma negall_ab" in ln)
    lemma = text[:text.index("proof econv")]
    seen = 0
    for seed in range(4):
        for m in mutate(text, seed, 12):
            # the lemma and the citing line itself must be untouched
            if m.kind == "delete_brace" or not m.text.startswith(lemma) or site not in m.text:
                continue
            before = check_document(parse_document(m.text)).report("econv")
            after = check_document(parse_document(_inline_negall(m.text))).report("econv")
            assert before.accepted == after.accepted
            seen += 1
    assert seen > 0
