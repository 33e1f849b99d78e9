"""Sorted first-order syntax: terms, formulas, signatures, substitution.

Formulas are immutable trees.  Negation is not a connective of its own:
``Not(a)`` builds ``Implies(a, FALSUM)`` and the printer re-sugars it.
Equality is an ordinary binary predicate named ``eq``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

EQ = "eq"


class SortError(ValueError):
    pass


class SignatureError(ValueError):
    pass


class NotPrenexError(ValueError):
    pass


# -- terms -----------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple

    def __str__(self):
        return format_term(self)


Term = Union[Var, Const, App]


# -- formulas --------------------------------------------------------------

class Formula:
    __slots__ = ()

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    pred: str
    args: tuple = ()

    def __repr__(self):
        return f"Atom({format_formula(self)!r})"


@dataclass(frozen=True, repr=False)
class Falsum(Formula):
    def __repr__(self):
        return "FALSUM"


FALSUM = Falsum()


@dataclass(frozen=True, repr=False)
class Binary(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class And(Binary):
    pass


class Or(Binary):
    pass


class Implies(Binary):
    pass


@dataclass(frozen=True, repr=False)
class Quant(Formula):
    var: str
    sort: str
    body: Formula

    @property
    def bound(self) -> Var:
        return Var(self.var, self.sort)

    def __repr__(self):
        return f"{type(self).__name__}({self.var!r}, {self.sort!r}, {self.body!r})"


class Forall(Quant):
    pass


class Exists(Quant):
    pass


def Not(f: Formula) -> Formula:
    return Implies(f, FALSUM)


def negated(f: Formula):
    """Return ``a`` when ``f`` is ``a -> false``, else None."""
    if isinstance(f, Implies) and f.right == FALSUM:
        return f.left
    return None


def eq(a, b) -> Atom:
    return Atom(EQ, (a, b))


def forall(vars_, body):
    """Nest universal quantifiers; ``vars_`` is a sequence of ``Var``."""
    for v in reversed(list(vars_)):
        body = Forall(v.name, v.sort, body)
    return body


# -- signatures ------------------------------------------------------------

@dataclass(frozen=True)
class FunctionDecl:
    """A function symbol declaration; ``args == ()`` declares a constant."""
    name: str
    args: tuple
    result: str


@dataclass(frozen=True)
class Signature:
    sorts: tuple = ()
    predicates: Mapping[str, tuple] = field(default_factory=dict)
    functions: Mapping[str, tuple] = field(default_factory=dict)
    constants: Mapping[str, str] = field(default_factory=dict)

    def kind_of(self, name):
        if name in self.sorts:
            return "sort"
        if name in self.predicates:
            return "predicate"
        if name in self.functions:
            return "function"
        if name in self.constants:
            return "constant"
        return None

    def names(self) -> set:
        return set(self.sorts) | set(self.predicates) | set(self.functions) | set(self.constants)

    def _fresh_check(self, name):
        if not name:
            raise SignatureError("empty symbol name")
        kind = self.kind_of(name)
        if kind is not None:
            raise SignatureError(f"{name!r} is already declared as a {kind}")

    def _sorts_check(self, sorts):
        for s in sorts:
            if s not in self.sorts:
                raise SignatureError(f"undeclared sort {s!r}")

    def add_sort(self, name) -> "Signature":
        self._fresh_check(name)
        return Signature(self.sorts + (name,), self.predicates, self.functions, self.constants)

    def add_predicate(self, name, arg_sorts) -> "Signature":
        self._fresh_check(name)
        self._sorts_check(arg_sorts)
        preds = dict(self.predicates)
        preds[name] = tuple(arg_sorts)
        return Signature(self.sorts, preds, self.functions, self.constants)

    def add_function(self, name, arg_sorts, result) -> "Signature":
        if not arg_sorts:
            return self.add_constant(name, result)
        self._fresh_check(name)
        self._sorts_check(tuple(arg_sorts) + (result,))
        fns = dict(self.functions)
        fns[name] = (tuple(arg_sorts), result)
        return Signature(self.sorts, self.predicates, fns, self.constants)

    def add_constant(self, name, sort) -> "Signature":
        self._fresh_check(name)
        self._sorts_check((sort,))
        consts = dict(self.constants)
        consts[name] = sort
        return Signature(self.sorts, self.predicates, self.functions, consts)

    def declare(self, decl: FunctionDecl) -> "Signature":
        return self.add_function(decl.name, decl.args, decl.result)


# -- traversal helpers -----------------------------------------------------

def term_vars(t) -> set:
    if isinstance(t, Var):
        return {t}
    if isinstance(t, App):
        out = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    return set()


def free_vars(f) -> set:
    if isinstance(f, Atom):
        out = set()
        for a in f.args:
            out |= term_vars(a)
        return out
    if isinstance(f, Binary):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Quant):
        return free_vars(f.body) - {f.bound}
    return set()


def _term_consts(t, out):
    if isinstance(t, Const):
        out.add(t.name)
    elif isinstance(t, App):
        for a in t.args:
            _term_consts(a, out)


def constants(f) -> set:
    out = set()
    for t in iter_terms(f):
        _term_consts(t, out)
    return out


def iter_terms(f):
    """Yield every top-level argument term of every atom in ``f``."""
    if isinstance(f, Atom):
        yield from f.args
    elif isinstance(f, Binary):
        yield from iter_terms(f.left)
        yield from iter_terms(f.right)
    elif isinstance(f, Quant):
        yield from iter_terms(f.body)


def symbols(f) -> set:
    """All non-logical symbol and variable names occurring in ``f``."""
    out = set()

    def term(t):
        if isinstance(t, (Var, Const)):
            out.add(t.name)
        else:
            out.add(t.fn)
            for a in t.args:
                term(a)

    def walk(g):
        if isinstance(g, Atom):
            out.add(g.pred)
            for a in g.args:
                term(a)
        elif isinstance(g, Binary):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, Quant):
            out.add(g.var)
            walk(g.body)

    walk(f)
    return out


def free_names(f) -> set:
    """Free variables and constants of ``f`` as ``(name, kind)`` pairs."""
    return {(v.name, "var") for v in free_vars(f)} | {(c, "const") for c in constants(f)}


def is_closed(f) -> bool:
    return not free_vars(f)


def connectives(f) -> list:
    """Connective and quantifier node types of ``f`` in preorder."""
    if isinstance(f, Binary):
        return [type(f).__name__] + connectives(f.left) + connectives(f.right)
    if isinstance(f, Quant):
        return [type(f).__name__] + connectives(f.body)
    if isinstance(f, Falsum):
        return ["Falsum"]
    return []


def fresh_name(base, avoid, numeric=False):
    """Smallest unused prime (or numeric) suffix of ``base`` not in ``avoid``."""
    if base not in avoid:
        return base
    k = 1
    while True:
        cand = f"{base}{k}" if numeric else base + "'" * k
        if cand not in avoid:
            return cand
        k += 1


# -- sorts -----------------------------------------------------------------

def term_sort(sig: Signature, t) -> str:
    if isinstance(t, Var):
        return t.sort
    if isinstance(t, Const):
        if t.name not in sig.constants:
            raise SortError(f"unknown constant {t.name!r}")
        return sig.constants[t.name]
    args, result = sig.functions.get(t.fn, (None, None))
    if args is None:
        raise SortError(f"unknown function {t.fn!r}")
    return result


@dataclass(frozen=True)
class SortDiagnostic:
    code: str
    message: str
    subject: object = None

    def __str__(self):
        return f"{self.code}: {self.message}"


def well_sorted(sig: Signature, f) -> list:
    """Diagnostics for ``f`` (a formula or a term) against ``sig``.

    An empty list means well-sorted.  Problems are reported, never raised.
    """
    diags = []

    def term(t):
        if isinstance(t, Var):
            if t.sort not in sig.sorts:
                diags.append(SortDiagnostic("unknown-sort", f"variable {t.name} has undeclared sort {t.sort!r}", t))
                return None
            return t.sort
        if isinstance(t, Const):
            if t.name in sig.constants:
                return sig.constants[t.name]
            diags.append(SortDiagnostic("unknown-symbol", f"unknown constant {t.name!r}", t))
            return None
        if t.fn not in sig.functions:
            diags.append(SortDiagnostic("unknown-symbol", f"unknown function {t.fn!r}", t))
            for a in t.args:
                term(a)
            return None
        want, result = sig.functions[t.fn]
        _args(t.fn, want, t.args, t)
        return result

    def _args(name, want, args, subject):
        if len(want) != len(args):
            diags.append(SortDiagnostic(
                "arity", f"{name} expects {len(want)} argument(s), got {len(args)}", subject))
            for a in args:
                term(a)
            return
        for w, a in zip(want, args):
            got = term(a)
            if got is not None and got != w:
                diags.append(SortDiagnostic(
                    "sort-mismatch", f"argument {format_term(a)} of {name} has sort {got}, expected {w}", a))

    def walk(g):
        if isinstance(g, Atom):
            if g.pred not in sig.predicates:
                diags.append(SortDiagnostic("unknown-symbol", f"unknown predicate {g.pred!r}", g))
                for a in g.args:
                    term(a)
            else:
                _args(g.pred, sig.predicates[g.pred], g.args, g)
        elif isinstance(g, Binary):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, Quant):
            if g.sort not in sig.sorts:
                diags.append(SortDiagnostic("unknown-sort", f"quantifier over undeclared sort {g.sort!r}", g))
            walk(g.body)

    if isinstance(f, (Var, Const, App)):
        term(f)
    else:
        walk(f)
    return diags


# -- substitution ----------------------------------------------------------

def _subst_term(t, vmap, cmap):
    if isinstance(t, Var):
        return vmap.get(t, t)
    if isinstance(t, Const):
        return cmap.get(t.name, t)
    return App(t.fn, tuple(_subst_term(a, vmap, cmap) for a in t.args))


def _image_vars(images) -> set:
    out = set()
    for im in images:
        out |= free_vars(im) if isinstance(im, Formula) else term_vars(im)
    return out


def _subst(f, vmap, cmap, amap):
    if not (vmap or cmap or amap):
        return f
    if isinstance(f, Atom):
        if not f.args and f.pred in amap:
            return amap[f.pred]
        return Atom(f.pred, tuple(_subst_term(a, vmap, cmap) for a in f.args))
    if isinstance(f, Binary):
        return type(f)(_subst(f.left, vmap, cmap, amap), _subst(f.right, vmap, cmap, amap))
    if isinstance(f, Quant):
        bound = f.bound
        vmap = {v: t for v, t in vmap.items() if v != bound}
        body_free = free_vars(f.body)
        live = [t for v, t in vmap.items() if v in body_free]
        live += list(cmap.values()) + list(amap.values())
        clash = {v.name for v in _image_vars(live)}
        name = f.var
        if name in clash:
            avoid = clash | symbols(f.body) | {v.name for v in vmap}
            name = fresh_name(f.var, avoid)
            vmap = dict(vmap)
            vmap[bound] = Var(name, f.sort)
        return type(f)(name, f.sort, _subst(f.body, vmap, cmap, amap))
    return f


def apply_subst(f, s: Mapping, sig: Signature = None):
    """Capture-avoiding substitution of terms for free variables.

    ``s`` maps ``Var`` to terms.  Image sorts are checked against the
    variable's sort (constants and applications need ``sig``).
    """
    for v, t in s.items():
        got = t.sort if isinstance(t, Var) else (term_sort(sig, t) if sig is not None else None)
        if got is not None and got != v.sort:
            raise SortError(f"cannot substitute {format_term(t)} of sort {got} for {v.name}:{v.sort}")
    return _subst(f, dict(s), {}, {})


def replace_symbols(f, consts: Mapping = None, atoms: Mapping = None):
    """Replace constants by terms and nullary atoms by formulas, avoiding capture."""
    return _subst(f, {}, dict(consts or {}), dict(atoms or {}))


def instantiate(q: Quant, t):
    """Body of ``q`` with its bound variable replaced by ``t``."""
    return _subst(q.body, {q.bound: t}, {}, {})


# -- alpha equivalence -----------------------------------------------------

def _alpha_term(s, t, es, et):
    if isinstance(s, Var) and isinstance(t, Var):
        i, j = es.get(s), et.get(t)
        if i is None and j is None:
            return s == t
        return i == j
    if type(s) is not type(t):
        return False
    if isinstance(s, Const):
        return s.name == t.name
    return (s.fn == t.fn and len(s.args) == len(t.args)
            and all(_alpha_term(a, b, es, et) for a, b in zip(s.args, t.args)))


def _alpha(f, g, ef, eg, depth):
    if type(f) is not type(g):
        return False
    if isinstance(f, Atom):
        return (f.pred == g.pred and len(f.args) == len(g.args)
                and all(_alpha_term(a, b, ef, eg) for a, b in zip(f.args, g.args)))
    if isinstance(f, Binary):
        return _alpha(f.left, g.left, ef, eg, depth) and _alpha(f.right, g.right, ef, eg, depth)
    if isinstance(f, Quant):
        if f.sort != g.sort:
            return False
        return _alpha(f.body, g.body, {**ef, f.bound: depth}, {**eg, g.bound: depth}, depth + 1)
    return True


def alpha_eq(f, g) -> bool:
    """Structural equality up to consistent renaming of bound variables."""
    return f == g or _alpha(f, g, {}, {}, 0)


# -- skolemization ---------------------------------------------------------

def is_quantifier_free(f) -> bool:
    if isinstance(f, Quant):
        return False
    if isinstance(f, Binary):
        return is_quantifier_free(f.left) and is_quantifier_free(f.right)
    return True


def skolemize(f, sig: Signature = None):
    """Skolem form of a closed prenex formula.

    Returns ``(formula, decls)`` where ``decls`` is a tuple of
    ``FunctionDecl`` for the fresh symbols (``args == ()`` for constants).
    """
    if free_vars(f):
        raise ValueError("skolemize needs a closed formula")
    g = f
    while isinstance(g, Quant):
        g = g.body
    if not is_quantifier_free(g):
        raise NotPrenexError(f"not in prenex form: {format_formula(f)}")

    avoid = symbols(f) | (sig.names() if sig is not None else set())
    decls = []

    def go(h, universals):
        if isinstance(h, Forall):
            v = h.bound
            return Forall(h.var, h.sort, go(h.body, universals + [v]))
        if isinstance(h, Exists):
            if universals:
                name = fresh_name("f", avoid, numeric=True)
                witness = App(name, tuple(universals))
            else:
                name = fresh_name("c", avoid, numeric=True)
                witness = Const(name)
            avoid.add(name)
            decls.append(FunctionDecl(name, tuple(v.sort for v in universals), h.sort))
            return go(instantiate(h, witness), universals)
        return h

    return go(f, []), tuple(decls)


# -- printing --------------------------------------------------------------

PREC_QUANT, PREC_IMP, PREC_OR, PREC_AND, PREC_NOT, PREC_ATOM = range(6)


def format_term(t) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    return f"{t.fn}({', '.join(format_term(a) for a in t.args)})"


def _prec(f):
    if isinstance(f, Quant):
        return PREC_QUANT
    neg = negated(f)
    if neg is not None:
        if isinstance(neg, Atom) and neg.pred == EQ and len(neg.args) == 2:
            return PREC_ATOM
        return PREC_NOT
    if isinstance(f, Implies):
        return PREC_IMP
    if isinstance(f, Or):
        return PREC_OR
    if isinstance(f, And):
        return PREC_AND
    return PREC_ATOM


def _wrap(f, need, rightmost, strict):
    p = _prec(f)
    if p == PREC_QUANT and rightmost:
        return _fmt(f, True)
    if p < need or (strict and p == need):
        return "(" + _fmt(f, True) + ")"
    return _fmt(f, rightmost)


_BINOPS = {And: ("&", PREC_AND), Or: ("|", PREC_OR), Implies: ("->", PREC_IMP)}


def _fmt(f, rightmost):
    if isinstance(f, Falsum):
        return "false"
    if isinstance(f, Atom):
        if f.pred == EQ and len(f.args) == 2:
            return f"{format_term(f.args[0])} = {format_term(f.args[1])}"
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(format_term(a) for a in f.args)})"
    neg = negated(f)
    if neg is not None:
        if isinstance(neg, Atom) and neg.pred == EQ and len(neg.args) == 2:
            return f"{format_term(neg.args[0])} != {format_term(neg.args[1])}"
        return "~" + _wrap(neg, PREC_NOT, rightmost, strict=False)
    if isinstance(f, Binary):
        op, p = _BINOPS[type(f)]
        right_assoc = isinstance(f, Implies)
        left = _wrap(f.left, p, False, strict=right_assoc)
        right = _wrap(f.right, p, rightmost, strict=not right_assoc)
        return f"{left} {op} {right}"
    # quantifier block: collapse a run of the same quantifier into one head
    kw = "all" if isinstance(f, Forall) else "ex"
    binders = []
    g = f
    while type(g) is type(f):
        binders.append(f"{g.var}:{g.sort}")
        g = g.body
    return f"{kw} {', '.join(binders)}. {_fmt(g, True)}"


def format_formula(f) -> str:
    return _fmt(f, True)
