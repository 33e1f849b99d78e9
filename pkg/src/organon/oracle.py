"""Finite-model semantics and a bounded entailment oracle.

Elements of a sort of size ``n`` are the integers ``0 .. n-1``.  A
predicate named ``eq`` whose two arguments share a sort is read as
identity and is never enumerated.

Models are ordered canonically: domain sizes (sorts in declaration order),
then constants, then function tables, then relation bits, each
lexicographically with ``False`` before ``True``.  ``entails_bruteforce``
walks that order literally.  ``entails`` returns the same first
countermodel but enumerates only sizes, constants and function tables
outright; the relations of each such candidate are found by grounding the
query to propositional clauses and searching for the lexicographically
least satisfying assignment.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

from .logic import (
    EQ, App, Atom, Binary, Const, Falsum, Forall, Implies, Or, And, Quant, Signature,
    Var, format_formula,
)

MAX_SIZE = 4
DEFAULT_BUDGET = 1_000_000


class OracleBudgetExceeded(RuntimeError):
    pass


class UnboundVariable(ValueError):
    pass


def is_identity(sig: Signature, pred) -> bool:
    sorts = sig.predicates.get(pred)
    return pred == EQ and sorts is not None and len(sorts) == 2 and sorts[0] == sorts[1]


# -- models ----------------------------------------------------------------

@dataclass(frozen=True)
class Model:
    signature: Signature
    sizes: Mapping[str, int]
    constants: Mapping[str, int] = field(default_factory=dict)
    functions: Mapping[str, Mapping[tuple, int]] = field(default_factory=dict)
    relations: Mapping[str, frozenset] = field(default_factory=dict)

    def domain(self, sort):
        return range(self.sizes[sort])

    def holds(self, pred, args) -> bool:
        if is_identity(self.signature, pred):
            return args[0] == args[1]
        return tuple(args) in self.relations.get(pred, frozenset())

    def to_dict(self):
        return {
            "sizes": dict(self.sizes),
            "constants": dict(self.constants),
            "functions": {f: [[*k, v] for k, v in sorted(t.items())] for f, t in self.functions.items()},
            "relations": {p: [list(t) for t in sorted(r)] for p, r in self.relations.items()},
        }

    def to_table(self) -> str:
        sig = self.signature
        out = []
        for s in sig.sorts:
            out.append(f"sort {s}: " + " ".join(str(e) for e in self.domain(s)))
        for c in sig.constants:
            out.append(f"const {c}: {self.constants[c]}")
        for f in sig.functions:
            table = self.functions[f]
            cells = " ".join(f"{f}({','.join(map(str, k))})={v}" for k, v in sorted(table.items()))
            out.append(f"fn {f}: {cells}")
        for p in sig.predicates:
            if is_identity(sig, p):
                out.append(f"pred {p}: identity")
                continue
            rel = sorted(self.relations.get(p, ()))
            cells = " ".join("(" + ",".join(map(str, t)) + ")" for t in rel)
            out.append(f"pred {p}: {cells or '-'}")
        return "\n".join(out)


@dataclass(frozen=True)
class ValidUpTo:
    n: int

    verdict = "valid_up_to"

    def to_dict(self):
        return {"verdict": "valid_up_to", "max_size": self.n}

    def __str__(self):
        return f"valid_up_to({self.n})"


@dataclass(frozen=True)
class Countermodel:
    model: Model
    assignment: tuple = ()

    verdict = "countermodel"

    @property
    def size(self):
        return max(self.model.sizes.values(), default=1)

    def to_dict(self):
        return {"verdict": "countermodel", "model": self.model.to_dict(),
                "assignment": {k: v for k, v in self.assignment}}

    def __str__(self):
        return "countermodel\n" + self.model.to_table()


# -- evaluation ------------------------------------------------------------

def _term_value(m: Model, rho, t):
    if isinstance(t, Var):
        if t.name not in rho:
            raise UnboundVariable(f"variable {t.name} is not assigned")
        return rho[t.name]
    if isinstance(t, Const):
        return m.constants[t.name]
    return m.functions[t.fn][tuple(_term_value(m, rho, a) for a in t.args)]


def evaluate(m: Model, rho, f) -> bool:
    """Classical truth value of ``f`` in ``m`` under assignment ``rho``.

    ``rho`` maps variables (or bare variable names) to elements.
    """
    env = {(k.name if isinstance(k, Var) else k): v for k, v in (rho or {}).items()}
    return _eval(m, env, f)


def _eval(m, rho, f):
    if isinstance(f, Atom):
        return m.holds(f.pred, [_term_value(m, rho, a) for a in f.args])
    if isinstance(f, Falsum):
        return False
    if isinstance(f, And):
        return _eval(m, rho, f.left) and _eval(m, rho, f.right)
    if isinstance(f, Or):
        return _eval(m, rho, f.left) or _eval(m, rho, f.right)
    if isinstance(f, Implies):
        return (not _eval(m, rho, f.left)) or _eval(m, rho, f.right)
    if isinstance(f, Quant):
        universal = isinstance(f, Forall)
        had, saved = f.var in rho, rho.get(f.var)
        result = universal
        try:
            for e in m.domain(f.sort):
                rho[f.var] = e
                if _eval(m, rho, f.body) != universal:
                    result = not universal
                    break
        finally:
            if had:
                rho[f.var] = saved
            else:
                rho.pop(f.var, None)
        return result
    raise TypeError(f"not a formula: {f!r}")


# -- naive enumeration -----------------------------------------------------

def _check_size(max_size):
    if not 1 <= max_size <= MAX_SIZE:
        raise ValueError(f"max_size must be between 1 and {MAX_SIZE}")


def _tuples(sizes, sorts):
    return list(itertools.product(*(range(sizes[s]) for s in sorts)))


def _enumerated_preds(sig):
    return [p for p in sig.predicates if not is_identity(sig, p)]


def count_models(sig: Signature, max_size: int) -> int:
    """Number of models ``iter_models`` yields, by closed form."""
    total = 0
    for combo in itertools.product(range(1, max_size + 1), repeat=len(sig.sorts)):
        sizes = dict(zip(sig.sorts, combo))
        n = 1
        for s in sig.constants.values():
            n *= sizes[s]
        for args, result in sig.functions.values():
            n *= sizes[result] ** math.prod(sizes[a] for a in args)
        for p in _enumerated_preds(sig):
            n *= 2 ** math.prod(sizes[a] for a in sig.predicates[p])
        total += n
    return total


def _fn_tables(sizes, args, result):
    keys = _tuples(sizes, args)
    for values in itertools.product(range(sizes[result]), repeat=len(keys)):
        yield dict(zip(keys, values))


def iter_models(sig: Signature, max_size: int):
    """Every model with all domains of size 1..max_size, in canonical order."""
    _check_size(max_size)
    consts = list(sig.constants)
    fns = list(sig.functions)
    preds = _enumerated_preds(sig)
    for combo in itertools.product(range(1, max_size + 1), repeat=len(sig.sorts)):
        sizes = dict(zip(sig.sorts, combo))
        const_choices = itertools.product(*(range(sizes[sig.constants[c]]) for c in consts))
        for cvals in const_choices:
            tables = [list(_fn_tables(sizes, *sig.functions[f])) for f in fns]
            for fvals in itertools.product(*tables):
                keys = [_tuples(sizes, sig.predicates[p]) for p in preds]
                flat = [(p, k) for p, ks in zip(preds, keys) for k in ks]
                for bits in itertools.product((False, True), repeat=len(flat)):
                    rels = {p: set() for p in preds}
                    for (p, k), b in zip(flat, bits):
                        if b:
                            rels[p].add(k)
                    yield Model(sig, sizes, dict(zip(consts, cvals)), dict(zip(fns, fvals)),
                                {p: frozenset(r) for p, r in rels.items()})


def entails_bruteforce(sig: Signature, axioms, goal, max_size: int, budget: int = DEFAULT_BUDGET):
    """Reference oracle: walk every model in canonical order."""
    _check_size(max_size)
    n = count_models(sig, max_size)
    if n > budget:
        raise OracleBudgetExceeded(f"{n} model candidates exceed the budget of {budget}")
    axioms = list(axioms)
    for m in iter_models(sig, max_size):
        if all(evaluate(m, {}, a) for a in axioms) and not evaluate(m, {}, goal):
            return Countermodel(m)
    return ValidUpTo(max_size)


# -- pruned search ---------------------------------------------------------

class _Work:
    def __init__(self, budget):
        self.budget = budget
        self.spent = 0

    def tick(self, what="search step"):
        self.spent += 1
        if self.spent > self.budget:
            raise OracleBudgetExceeded(f"work budget of {self.budget} exhausted ({what})")


def _relevant(sig, formulas):
    preds, fns, consts, sorts = set(), set(), set(), set()

    def term(t):
        if isinstance(t, Const):
            consts.add(t.name)
        elif isinstance(t, App):
            fns.add(t.fn)
            for a in t.args:
                term(a)

    def walk(f):
        if isinstance(f, Atom):
            preds.add(f.pred)
            for a in f.args:
                term(a)
        elif isinstance(f, Binary):
            walk(f.left)
            walk(f.right)
        elif isinstance(f, Quant):
            sorts.add(f.sort)
            walk(f.body)

    for f in formulas:
        walk(f)
    for p in preds:
        sorts.update(sig.predicates.get(p, ()))
    for f in fns:
        args, result = sig.functions[f]
        sorts.update(args)
        sorts.add(result)
    for c in consts:
        sorts.add(sig.constants[c])
    return preds, fns, consts, sorts


def _and(parts):
    out = []
    for p in parts:
        if p is False:
            return False
        if p is True:
            continue
        out.append(p)
    if not out:
        return True
    return out[0] if len(out) == 1 else ("and", out)


def _or(parts):
    out = []
    for p in parts:
        if p is True:
            return True
        if p is False:
            continue
        out.append(p)
    if not out:
        return False
    return out[0] if len(out) == 1 else ("or", out)


class _Grounder:
    """Ground a closed formula into negation normal form over SAT literals.

    Relation atoms are literals from ``atom_index``.  A function table entry
    ``f(k) = v`` is the literal ``fn_index[(f, k, v)]``; the caller adds
    exactly-one constraints, so the cases returned by ``term`` partition
    every model and an atom can be written as a disjunction over them.
    """

    def __init__(self, sig, sizes, consts, atom_index, fn_index, work):
        self.sig = sig
        self.sizes = sizes
        self.consts = consts
        self.index = atom_index
        self.fn_index = fn_index
        self.work = work

    def term(self, t, env):
        """List of (value, condition) cases for ``t``."""
        if isinstance(t, Var):
            return [(env[t], True)]
        if isinstance(t, Const):
            return [(self.consts[t.name], True)]
        result = self.sig.functions[t.fn][1]
        by_value = {}
        for combo in itertools.product(*(self.term(a, env) for a in t.args)):
            key = tuple(v for v, _ in combo)
            cond = _and([c for _, c in combo])
            for v in range(self.sizes[result]):
                by_value.setdefault(v, []).append(_and([cond, self.fn_index[(t.fn, key, v)]]))
        return [(v, _or(cs)) for v, cs in by_value.items()]

    def ground(self, f, env, pos):
        if isinstance(f, Atom):
            cases = []
            for combo in itertools.product(*(self.term(a, env) for a in f.args)):
                args = tuple(v for v, _ in combo)
                if is_identity(self.sig, f.pred):
                    x = (args[0] == args[1]) == pos
                else:
                    lit = self.index[(f.pred, args)]
                    x = lit if pos else -lit
                cases.append(_and([c for _, c in combo] + [x]))
            return _or(cases)
        if isinstance(f, Falsum):
            return not pos
        if isinstance(f, Implies):
            parts = [self.ground(f.left, env, not pos), self.ground(f.right, env, pos)]
            return _or(parts) if pos else _and(parts)
        if isinstance(f, (And, Or)):
            parts = [self.ground(f.left, env, pos), self.ground(f.right, env, pos)]
            return _and(parts) if isinstance(f, And) == pos else _or(parts)
        if isinstance(f, Quant):
            v = f.bound
            parts = []
            for e in range(self.sizes[f.sort]):
                self.work.tick("grounding")
                parts.append(self.ground(f.body, {**env, v: e}, pos))
            return _and(parts) if isinstance(f, Forall) == pos else _or(parts)
        raise TypeError(f"not a formula: {f!r}")


def _clauses(root, nvars):
    """Definitional clauses for an NNF tree; returns (clauses, variable count)."""
    clauses = []
    counter = [nvars]

    def lit(node):
        if isinstance(node, int):
            return node
        counter[0] += 1
        x = counter[0]
        op, kids = node
        ks = [lit(k) for k in kids]
        if op == "and":
            for k in ks:
                clauses.append((-x, k))
        else:
            clauses.append((-x, *ks))
        return x

    if root is True:
        return [], nvars
    if root is False:
        return [()], nvars
    clauses.append((lit(root),))
    return clauses, counter[0]


class _Solver:
    """Small conflict-driven clause-learning solver.

    Two watched literals, first-UIP learning, non-chronological backjumping
    and activity-ordered decisions (false first).  Assumptions are decided
    first, one per level; learned clauses are kept between calls.
    """

    def __init__(self, clauses, nvars, work):
        self.nvars = nvars
        self.work = work
        self.clauses = []
        self.watches = {}
        self.units = []
        self.empty = False
        self.activity = [0.0] * (nvars + 1)
        self.inc = 1.0
        for c in clauses:
            c = list(dict.fromkeys(c))
            if any(-l in c for l in c):
                continue
            if not c:
                self.empty = True
            elif len(c) == 1:
                self.units.append(c[0])
            else:
                self._attach(c)

    def _attach(self, c):
        i = len(self.clauses)
        self.clauses.append(c)
        self.watches.setdefault(c[0], []).append(i)
        self.watches.setdefault(c[1], []).append(i)
        return i

    def _bump(self, v):
        self.activity[v] += self.inc
        if self.activity[v] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.inc *= 1e-100

    def solve(self, assumptions=()):
        if self.empty:
            return None
        n = self.nvars
        value = [None] * (n + 1)
        level = [0] * (n + 1)
        reason = [None] * (n + 1)
        trail, lims = [], []
        qhead = 0

        def val(l):
            x = value[abs(l)]
            return None if x is None else (x == (l > 0))

        def enqueue(l, why):
            v = abs(l)
            value[v] = l > 0
            level[v] = len(lims)
            reason[v] = why
            trail.append(l)

        def propagate():
            nonlocal qhead
            while qhead < len(trail):
                f = -trail[qhead]
                qhead += 1
                ws = self.watches.get(f)
                if not ws:
                    continue
                keep = []
                for k, ci in enumerate(ws):
                    c = self.clauses[ci]
                    if c[0] == f:
                        c[0], c[1] = c[1], c[0]
                    if val(c[0]) is True:
                        keep.append(ci)
                        continue
                    for m in range(2, len(c)):
                        if val(c[m]) is not False:
                            c[1], c[m] = c[m], c[1]
                            self.watches.setdefault(c[1], []).append(ci)
                            break
                    else:
                        keep.append(ci)
                        if val(c[0]) is False:
                            keep.extend(ws[k + 1:])
                            self.watches[f] = keep
                            return ci
                        enqueue(c[0], ci)
                self.watches[f] = keep
            return None

        def backtrack(lvl):
            nonlocal qhead
            if len(lims) > lvl:
                for l in trail[lims[lvl]:]:
                    value[abs(l)] = None
                    reason[abs(l)] = None
                del trail[lims[lvl]:]
                del lims[lvl:]
                qhead = len(trail)

        def analyze(ci):
            seen = set()
            learnt = [None]
            counter = 0
            p = None
            idx = len(trail) - 1
            current = len(lims)
            while True:
                for q in self.clauses[ci]:
                    v = abs(q)
                    if p is not None and v == abs(p):
                        continue
                    if v not in seen and level[v] > 0:
                        seen.add(v)
                        self._bump(v)
                        if level[v] == current:
                            counter += 1
                        else:
                            learnt.append(q)
                while abs(trail[idx]) not in seen:
                    idx -= 1
                p = trail[idx]
                idx -= 1
                seen.discard(abs(p))
                counter -= 1
                if counter == 0:
                    break
                ci = reason[abs(p)]
            learnt[0] = -p
            back = 0
            if len(learnt) > 1:
                best = max(range(1, len(learnt)), key=lambda i: level[abs(learnt[i])])
                learnt[1], learnt[best] = learnt[best], learnt[1]
                back = level[abs(learnt[1])]
            return learnt, back

        for l in self.units:
            if val(l) is False:
                return None
            if val(l) is None:
                enqueue(l, None)
        assumptions = list(assumptions)
        while True:
            confl = propagate()
            if confl is not None:
                self.work.tick("conflict")
                if not lims:
                    return None
                learnt, back = analyze(confl)
                self.inc /= 0.95
                backtrack(back)
                if len(learnt) == 1:
                    self.units.append(learnt[0])
                    enqueue(learnt[0], None)
                else:
                    enqueue(learnt[0], self._attach(learnt))
                continue
            lvl = len(lims)
            if lvl < len(assumptions):
                a = assumptions[lvl]
                if val(a) is False:
                    return None
                lims.append(len(trail))
                if val(a) is None:
                    enqueue(a, None)
                continue
            best, v = -1.0, None
            for i in range(1, n + 1):
                if value[i] is None and self.activity[i] > best:
                    best, v = self.activity[i], i
            if v is None:
                return value
            self.work.tick()
            lims.append(len(trail))
            enqueue(-v, None)


def _least_model(solver, choices):
    """Lexicographically least model over ``choices``.

    Each choice is a list of mutually exclusive literals in preference
    order; the result gives, per choice, the index of the literal taken.
    """
    value = solver.solve()
    if value is None:
        return None

    def taken(opts):
        return next(i for i, l in enumerate(opts) if value[abs(l)] == (l > 0))

    fixed, picks = [], []
    for opts in choices:
        i = taken(opts)
        for j in range(i):
            trial = solver.solve(fixed + [opts[j]])
            if trial is not None:
                value, i = trial, j
                break
        fixed.append(opts[i])
        picks.append(i)
    return picks


def entails_in(sig: Signature, axioms, goal, max_size: int, budget: int = DEFAULT_BUDGET):
    """First countermodel in canonical order, or ``ValidUpTo(max_size)``.

    Sizes and constants are enumerated; function tables and relations are
    left to the solver, which is asked for the least model in the same order
    ``iter_models`` would reach it.
    """
    _check_size(max_size)
    axioms = list(axioms)
    work = _Work(budget)
    preds, fns, consts, sorts = _relevant(sig, axioms + [goal])
    sort_order = list(sig.sorts)
    ranges = [range(1, max_size + 1) if s in sorts else (1,) for s in sort_order]
    enum_preds = [p for p in _enumerated_preds(sig) if p in preds]
    for combo in itertools.product(*ranges):
        sizes = dict(zip(sort_order, combo))
        nvars = 0
        fn_index, entries = {}, []
        for f in sig.functions:
            if f not in fns:
                continue
            args, result = sig.functions[f]
            for k in _tuples(sizes, args):
                lits = []
                for v in range(sizes[result]):
                    nvars += 1
                    fn_index[(f, k, v)] = nvars
                    lits.append(nvars)
                entries.append(((f, k), lits))
        index, atoms = {}, []
        for p in enum_preds:
            for k in _tuples(sizes, sig.predicates[p]):
                nvars += 1
                atoms.append((p, k))
                index[(p, k)] = nvars
        one_of = []
        for _, lits in entries:
            one_of.append(tuple(lits))
            one_of.extend((-x, -y) for x, y in itertools.combinations(lits, 2))
        choices = [lits for _, lits in entries] + [[-index[a], index[a]] for a in atoms]
        const_ranges = [range(sizes[sig.constants[c]]) if c in consts else (0,) for c in sig.constants]
        for cvals in itertools.product(*const_ranges):
            work.tick("model candidates")
            cmap = dict(zip(sig.constants, cvals))
            g = _Grounder(sig, sizes, cmap, index, fn_index, work)
            root = _and([g.ground(a, {}, True) for a in axioms] + [g.ground(goal, {}, False)])
            clauses, total = _clauses(root, nvars)
            if clauses != [()]:
                clauses = clauses + one_of
            picks = _least_model(_Solver(clauses, total, work), choices)
            if picks is None:
                continue
            fmap = {f: {k: 0 for k in _tuples(sizes, sig.functions[f][0])} for f in sig.functions}
            for ((f, k), _), v in zip(entries, picks):
                fmap[f][k] = v
            rels = {p: set() for p in _enumerated_preds(sig)}
            for (p, k), b in zip(atoms, picks[len(entries):]):
                if b:
                    rels[p].add(k)
            m = Model(sig, sizes, cmap, fmap, {p: frozenset(r) for p, r in rels.items()})
            if not all(evaluate(m, {}, a) for a in axioms) or evaluate(m, {}, goal):
                raise AssertionError("oracle produced a model that is not a countermodel")
            return Countermodel(m)
    return ValidUpTo(max_size)


# -- theories --------------------------------------------------------------

def theory_axioms(theory, extra=()):
    """Closed formulas standing for ``theory``: its axioms, the universal
    closures of its term schemata, and any ``extra`` formulas."""
    out = list(theory.axioms.values())
    for name in theory.schemata:
        closure = theory.schemata[name].closure()
        if closure is not None:
            out.append(closure)
    out.extend(extra)
    return out


def entails(theory, goal, max_size: int = 3, budget: int = DEFAULT_BUDGET, extra=()):
    """Does ``theory`` entail ``goal`` in every model with domains up to ``max_size``?"""
    return entails_in(theory.signature, theory_axioms(theory, extra), goal, max_size, budget)


def describe(verdict) -> str:
    return str(verdict)


__all__ = [
    "Model", "ValidUpTo", "Countermodel", "OracleBudgetExceeded", "UnboundVariable",
    "evaluate", "iter_models", "count_models", "entails_bruteforce", "entails_in", "entails",
    "theory_axioms", "is_identity", "format_formula",
]
