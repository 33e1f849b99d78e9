import os

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from organon.corpus import corpus_dir
from organon.logic import (
    And, App, Atom, Const, Exists, FALSUM, Forall, Implies, Or, Signature, Var,
)

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CORPUS = corpus_dir()
CORPUS_FILES = sorted(str(p.relative_to(CORPUS)) for p in CORPUS.rglob("*.anc"))


@pytest.fixture
def corpus():
    return CORPUS


def corpus_text(name):
    return (CORPUS / name).read_text(encoding="utf-8")


# -- random formulas over small signatures ---------------------------------

def small_signature(functions=True, binary=True, two_sorts=False):
    sig = Signature().add_sort("s")
    sig = sig.add_predicate("P", ("s",)).add_predicate("Q", ("s",))
    if binary:
        sig = sig.add_predicate("R", ("s", "s"))
    sig = sig.add_constant("a", "s")
    if functions:
        sig = sig.add_function("f", ("s",), "s")
    if two_sorts:
        sig = sig.add_sort("t").add_predicate("T", ("t",)).add_predicate("K", ("s", "t"))
        sig = sig.add_constant("b", "t")
    return sig


VAR_NAMES = ("x", "y", "z")


@st.composite
def terms(draw, sig, sort, scope, depth=1):
    options = [v for v in scope if v.sort == sort]
    options += [Const(c) for c, s in sig.constants.items() if s == sort]
    fns = [f for f, (args, res) in sig.functions.items() if res == sort]
    if depth > 0 and fns and draw(st.booleans()):
        f = draw(st.sampled_from(sorted(fns)))
        args = tuple(draw(terms(sig, s, scope, depth - 1)) for s in sig.functions[f][0])
        return App(f, args)
    return draw(st.sampled_from(options))


@st.composite
def formulas(draw, sig, depth=3, scope=(), closed=True):
    """Well-sorted formulas; variables drawn from a tiny pool so shadowing
    and capture situations come up often."""
    kinds = ["atom", "atom", "false"]
    if depth > 0:
        kinds += ["and", "or", "imp", "all", "ex"]
    kind = draw(st.sampled_from(kinds))
    if kind == "false":
        return FALSUM
    if kind == "atom":
        preds = sorted(sig.predicates)
        p = draw(st.sampled_from(preds))
        args = tuple(draw(terms(sig, s, scope)) for s in sig.predicates[p])
        return Atom(p, args)
    if kind in ("all", "ex"):
        sort = draw(st.sampled_from(sorted(sig.sorts)))
        name = draw(st.sampled_from(VAR_NAMES))
        v = Var(name, sort)
        inner = tuple(u for u in scope if u.name != name) + (v,)
        body = draw(formulas(sig, depth - 1, inner, closed))
        return (Forall if kind == "all" else Exists)(name, sort, body)
    cls = {"and": And, "or": Or, "imp": Implies}[kind]
    return cls(draw(formulas(sig, depth - 1, scope, closed)),
               draw(formulas(sig, depth - 1, scope, closed)))


# -- acceptance summary ----------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
