import itertools
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from organon.logic import (
    And, App, Atom, Const, Exists, FALSUM, Forall, Implies, NotPrenexError, Or, Signature,
    SortError, Var, alpha_eq, apply_subst, connectives, free_names, free_vars, is_closed,
    replace_symbols, skolemize, well_sorted,
)
from organon.oracle import Model, evaluate, iter_models
from organon.script import parse_formula

from conftest import formulas, small_signature

x, y, z = Var("x", "s"), Var("y", "s"), Var("z", "s")
c = Const("c")


def P(*a):
    return Atom("P", a)


def Q(*a):
    return Atom("Q", a)


def R(*a):
    return Atom("R", a)


def qty_sig():
    sig = Signature().add_sort("qty")
    for n in ("8", "4", "2"):
        sig = sig.add_constant(n, "qty")
    sig = sig.add_predicate("Double", ("qty", "qty")).add_predicate("Quadruple", ("qty", "qty"))
    return sig


# -- apply_subst -----------------------------------------------------------

def test_subst_galen_instance():
    a, b = Var("a", "qty"), Var("b", "qty")
    f = Atom("Double", (a, b))
    got = apply_subst(f, {a: Const("8"), b: Const("4")}, qty_sig())
    assert got == Atom("Double", (Const("8"), Const("4")))


def test_subst_leaves_bound_occurrences():
    f = And(P(x), Forall("x", "s", Q(x)))
    assert apply_subst(f, {x: c}) == And(P(c), Forall("x", "s", Q(x)))


def test_subst_renames_to_avoid_capture():
    f = Forall("y", "s", R(x, y))
    got = apply_subst(f, {x: y})
    assert isinstance(got, Forall) and got.var != "y"
    assert got.body == R(y, Var(got.var, "s"))
    assert got.var == "y'"  # smallest prime suffix


def test_subst_sort_mismatch():
    with pytest.raises(SortError):
        apply_subst(P(x), {x: Var("u", "other")})


# -- alpha_eq --------------------------------------------------------------

def test_alpha_eq_examples():
    assert alpha_eq(Forall("x", "s", P(x)), Forall("y", "s", P(y)))
    assert not alpha_eq(P(x), P(y))
    A = lambda t: Atom("A", (t,))
    B = lambda t: Atom("B", (t,))
    assert alpha_eq(Exists("x", "s", And(A(x), B(x))), Exists("z", "s", And(A(z), B(z))))


def test_alpha_eq_respects_sorts_and_structure():
    assert not alpha_eq(Forall("x", "s", P(x)), Forall("x", "t", Atom("P", (Var("x", "t"),))))
    assert not alpha_eq(Forall("x", "s", Forall("y", "s", R(x, y))),
                        Forall("x", "s", Forall("y", "s", R(y, x))))


# -- free_names ------------------------------------------------------------

def test_free_names_examples():
    A = lambda t: Atom("A", (t,))
    B = lambda t: Atom("B", (t,))
    closed = Forall("x", "s", Implies(B(x), Implies(A(x), FALSUM)))
    assert free_names(closed) == set()
    assert free_names(And(A(c), B(c))) == {("c", "const")}
    t = Var("t", "time")
    xb, yb = Var("x", "body"), Var("y", "body")
    stops = Implies(Atom("Stops", (xb, t)), Atom("Stops", (yb, t)))
    assert free_names(stops) == {("x", "var"), ("y", "var"), ("t", "var")}


# -- well_sorted -----------------------------------------------------------

def test_well_sorted_examples():
    sig = qty_sig()
    assert well_sorted(sig, Atom("Quadruple", (Const("8"), Const("2")))) == []
    diags = well_sorted(sig, Atom("Double", (Const("8"),)))
    assert [d.code for d in diags] == ["arity"]
    diags = well_sorted(sig, Atom("Triple", (Const("8"),)))
    assert [d.code for d in diags] == ["unknown-symbol"]
    assert diags[0].subject == Atom("Triple", (Const("8"),))


def test_well_sorted_sort_mismatch_names_subterm():
    sig = qty_sig().add_sort("ind").add_constant("socrates", "ind")
    diags = well_sorted(sig, Atom("Double", (Const("8"), Const("socrates"))))
    assert [d.code for d in diags] == ["sort-mismatch"]
    assert diags[0].subject == Const("socrates")


# -- skolemize -------------------------------------------------------------

def tri_sig():
    return Signature().add_sort("seg").add_sort("tri").add_predicate("T", ("seg", "tri"))


def test_skolemize_euclid_shape():
    xs, yt = Var("x", "seg"), Var("y", "tri")
    f = Forall("x", "seg", Exists("y", "tri", Atom("T", (xs, yt))))
    g, decls = skolemize(f, tri_sig())
    (d,) = decls
    assert g == Forall("x", "seg", Atom("T", (xs, App(d.name, (xs,)))))
    assert d.args == ("seg",) and d.result == "tri"


def test_skolemize_no_existentials():
    f = Forall("x", "s", P(x))
    assert skolemize(f) == (f, ())


def test_skolemize_leading_existential_gives_constant():
    g, (d,) = skolemize(Exists("y", "s", P(y)))
    assert d.args == () and g == P(Const(d.name))


def test_skolemize_rejects_non_prenex():
    with pytest.raises(NotPrenexError):
        skolemize(Forall("x", "s", Implies(P(x), Exists("y", "s", R(x, y)))))


def _extend(sig, decls):
    for d in decls:
        sig = sig.declare(d)
    return sig


def _expansions(model, sig2, decls):
    """Every way of interpreting the fresh Skolem symbols on top of ``model``."""
    sizes = model.sizes
    choices = []
    for d in decls:
        keys = list(itertools.product(*(range(sizes[s]) for s in d.args)))
        choices.append([(d, dict(zip(keys, vals)))
                        for vals in itertools.product(range(sizes[d.result]), repeat=len(keys))])
    for combo in itertools.product(*choices):
        consts, fns = dict(model.constants), dict(model.functions)
        for d, table in combo:
            if d.args:
                fns[d.name] = table
            else:
                consts[d.name] = table[()]
        yield Model(sig2, sizes, consts, fns, model.relations)


def skolem_equisatisfiable(sig, f, max_size=2):
    g, decls = skolemize(f, sig)
    sig2 = _extend(sig, decls)
    for m in iter_models(sig, max_size):
        lhs = evaluate(m, {}, f)
        rhs = any(evaluate(m2, {}, g) for m2 in _expansions(m, sig2, decls))
        if lhs != rhs:
            return False
    return True


def test_skolem_equisatisfiable_euclid():
    xs, yt = Var("x", "seg"), Var("y", "tri")
    f = Forall("x", "seg", Exists("y", "tri", Atom("T", (xs, yt))))
    assert skolem_equisatisfiable(tri_sig(), f)


@st.composite
def prenex(draw):
    sig = small_signature(functions=False)
    n = draw(st.integers(1, 3))
    names = ["x", "y", "z"][:n]
    quants = [draw(st.sampled_from([Forall, Exists])) for _ in names]
    scope = tuple(Var(v, "s") for v in names)
    matrix = draw(formulas(sig, depth=2, scope=scope).filter(
        lambda m: not {"Forall", "Exists"} & set(connectives(m))))
    f = matrix
    for q, v in reversed(list(zip(quants, names))):
        f = q(v, "s", f)
    return sig, f


@given(prenex())
@settings(max_examples=40)
def test_skolem_equisatisfiable_random(case):
    sig, f = case
    g, _ = skolemize(f, sig)
    assert "Exists" not in connectives(g)
    assert skolem_equisatisfiable(sig, f)


# -- properties ------------------------------------------------------------

SIG = small_signature()


@given(formulas(SIG))
def test_subst_identity_on_closed(f):
    assert is_closed(f)
    assert apply_subst(f, {x: Const("a")}) == f


@given(formulas(SIG, scope=(x, y)), st.sampled_from([Const("a"), y, App("f", (y,))]))
def test_subst_preserves_connectives(f, t):
    g = apply_subst(f, {x: t}, SIG)
    assert Counter(connectives(g)) == Counter(connectives(f))


@given(formulas(SIG, scope=(x, y, z)))
def test_subst_compositional_on_disjoint_domains(f):
    s1, s2 = {x: Const("a")}, {y: App("f", (Const("a"),))}
    both = apply_subst(f, {**s1, **s2}, SIG)
    assert alpha_eq(both, apply_subst(apply_subst(f, s1, SIG), s2, SIG))
    assert alpha_eq(both, apply_subst(apply_subst(f, s2, SIG), s1, SIG))


def _rename_bound(f, k):
    """Rename every binder to a fresh name (an alpha-variant)."""
    if isinstance(f, (Forall, Exists)):
        new = f"v{k}"
        body = apply_subst(f.body, {f.bound: Var(new, f.sort)})
        return type(f)(new, f.sort, _rename_bound(body, k + 1))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_rename_bound(f.left, k + 10), _rename_bound(f.right, k + 20))
    return f


@given(formulas(SIG, scope=(x, y)))
def test_alpha_eq_is_an_equivalence(f):
    g = _rename_bound(f, 0)
    h = _rename_bound(g, 100)
    assert alpha_eq(f, f)
    assert alpha_eq(f, g) and alpha_eq(g, f)
    assert alpha_eq(f, h) and alpha_eq(g, h)


@given(formulas(SIG, scope=(x, y)), st.sampled_from([Const("a"), y, App("f", (y,))]))
def test_subst_respects_alpha(f, t):
    g = _rename_bound(f, 0)
    assert alpha_eq(apply_subst(f, {x: t}, SIG), apply_subst(g, {x: t}, SIG))


@given(formulas(SIG, scope=(x, y)))
def test_random_formulas_are_well_sorted(f):
    assert well_sorted(SIG, f) == []
    assert free_vars(f) <= {x, y}


def _term_value(m, rho, t):
    if isinstance(t, Var):
        return rho[t.name]
    if isinstance(t, Const):
        return m.constants[t.name]
    return m.functions[t.fn][tuple(_term_value(m, rho, a) for a in t.args)]


# every model of a reduced signature up to size 3 (5184 at size 3)
SUBST_SIG = small_signature(binary=False)
SUBST_MODELS = list(iter_models(SUBST_SIG, 3))
SUBST_FORMULAS = [
    "all y:s. P(x) -> Q(y)",
    "ex y:s. P(f(y)) & ~Q(x)",
    "(all x:s. P(x)) | Q(f(x))",
    "ex z:s. (P(z) -> Q(x)) & all y:s. Q(y) | P(f(x))",
]


@pytest.mark.parametrize("text", SUBST_FORMULAS)
@pytest.mark.parametrize("t", [Const("a"), Var("y", "s"), App("f", (Var("y", "s"),))])
def test_semantic_substitution_lemma_exhaustive(text, t):
    # the parser reads the free x as a constant; turn it back into a variable
    f = replace_symbols(parse_formula(text, ["s"]), consts={"x": x})
    g = apply_subst(f, {x: t}, SUBST_SIG)
    for m in SUBST_MODELS:
        for yv in range(m.sizes["s"]):
            rho = {"y": yv}
            rho_x = {**rho, "x": _term_value(m, rho, t)}
            assert evaluate(m, rho, g) == evaluate(m, rho_x, f)


# all models of the full signature up to size 2
MODELS_2 = list(iter_models(SIG, 2))


@given(formulas(SIG, scope=(x, y)), st.sampled_from([Const("a"), y, App("f", (y,))]),
       st.data())
def test_semantic_substitution_lemma_random(f, t, data):
    m = data.draw(st.sampled_from(MODELS_2))
    rho = {"y": data.draw(st.integers(0, m.sizes["s"] - 1))}
    rho_x = {**rho, "x": _term_value(m, rho, t)}
    assert evaluate(m, rho, apply_subst(f, {x: t}, SIG)) == evaluate(m, rho_x, f)
