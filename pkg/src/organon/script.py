"""The ``.anc`` proof-script language: lexer, parser and canonical renderer.

A document is a sequence of declarations::

    sort ind
    pred S(ind)
    axiom exS : ex x:ind. S(x);
    proof p : S(a) -> S(a) {
      {
        assume h : S(a);
      }
      l1 : S(a) -> S(a) by imp_i h-h;
    }

Operator precedence, tightest first: ``~``, ``&``, ``|``, ``->``.  ``&`` and
``|`` associate to the left, ``->`` to the right, and a quantifier body
extends as far right as possible.  ``~A`` and ``a != b`` are read as
``A -> false`` and ``~(a = b)``.  Unicode connectives are accepted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .kernel import (
    FORMULA_ARG_RULES, HYP, NAMED_RULES, RULES, Block, BlockRef, Justification, Line,
    Meta, Proof, Schema,
)
from .logic import (
    FALSUM, App, Atom, Const, Exists, Forall, Not, Or, And, Implies, Var, eq,
    format_formula, format_term,
)

MAX_DEPTH = 200

KEYWORDS = frozenset({
    "sort", "pred", "fn", "const", "axiom", "schema", "lemma", "proof", "assume", "fix",
    "by", "all", "ex", "false", "sequent", "indem", "derive",
})

_UNICODE = {"∀": "all", "∃": "ex", "¬": "~", "∧": "&", "∨": "|", "→": "->",
            "⊥": "false", "≠": "!=", "⊢": "|-"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<num>[0-9]+)
  | (?P<op>->|\|-|!=|:=|[(){}\[\],;:.&|~=@-])
  | (?P<uni>[∀∃¬∧∨→⊥≠⊢])
""", re.X)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def covers(self, line, col, end_line=None, end_col=None):
        end_line = line if end_line is None else end_line
        end_col = col if end_col is None else end_col
        return ((self.start_line, self.start_col) <= (line, col)
                and (end_line, end_col) <= (self.end_line, self.end_col))

    def to_dict(self):
        return {"file": self.file, "start": [self.start_line, self.start_col],
                "end": [self.end_line, self.end_col]}

    def __str__(self):
        return f"{self.file}:{self.start_line}:{self.start_col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    span: SourceSpan
    message: str
    code: str

    def __str__(self):
        return f"{self.span}: {self.severity}[{self.code}]: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics):
        super().__init__(str(diagnostics[0]))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    end_line: int
    end_col: int


# -- declarations ----------------------------------------------------------

def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SortDecl:
    name: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class PredDecl:
    name: str
    sorts: tuple
    span: SourceSpan = _span()


@dataclass(frozen=True)
class FnDecl:
    name: str
    args: tuple
    result: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ConstDecl:
    name: str
    sort: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class AxiomDecl:
    name: str
    formula: object
    span: SourceSpan = _span()


@dataclass(frozen=True)
class SchemaDecl:
    name: str
    metas: tuple
    formula: object
    span: SourceSpan = _span()

    @property
    def schema(self):
        return Schema(self.metas, self.formula)


@dataclass(frozen=True)
class LemmaDecl:
    kind: str
    name: str
    metas: tuple
    goal: object
    body: Block
    span: SourceSpan = _span()

    @property
    def proof(self):
        return Proof(self.name, self.goal, self.body, self.metas)


@dataclass(frozen=True)
class SequentDecl:
    name: str
    premises: tuple
    conclusion: object
    span: SourceSpan = _span()


@dataclass(frozen=True)
class IndemDecl:
    name: str
    metas: tuple
    premises: tuple
    conclusion: object
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Step:
    label: str
    premises: tuple
    conclusion: object
    rule: str
    name: str = None
    refs: tuple = ()
    position: int = None
    span: SourceSpan = _span()


@dataclass(frozen=True)
class DeriveDecl:
    name: str
    steps: tuple
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Document:
    decls: tuple
    file: str = field(default="<input>", compare=False)

    def find(self, name, kind=None):
        for d in self.decls:
            if getattr(d, "name", None) == name and (kind is None or isinstance(d, kind)):
                return d
        return None


# -- lexer -----------------------------------------------------------------

def tokenize(text, file="<input>"):
    text = text.replace("\r\n", "\n")
    toks = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(file, line, col, line, col + 1)
            raise ParseError([Diagnostic("error", span, f"unexpected character {text[pos]!r}", "lexical")])
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        elif kind in ("ws", "comment"):
            col += len(s)
        else:
            if kind == "uni":
                s, kind = _UNICODE[s], "op"
                if s in KEYWORDS:
                    kind = "kw"
            elif kind == "id" and s in KEYWORDS:
                kind = "kw"
            width = m.end() - m.start()
            toks.append(Token(kind, s, line, col, line, col + width))
            col += width
        pos = m.end()
    toks.append(Token("eof", "", line, col, line, col))
    return toks


# -- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text, file):
        self.file = file
        self.toks = tokenize(text, file)
        self.i = 0
        self.scopes = []
        self.depth = 0
        self.sorts = set()
        self.symbols = set()
        self.named = {}
        self.metas = {}

    # token helpers

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self):
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, text, k=0):
        tok = self.peek(k)
        return tok.text == text and tok.kind in ("op", "kw")

    def accept(self, text):
        if self.at(text):
            return self.advance()
        return None

    def span(self, tok, end=None):
        end = end or tok
        return SourceSpan(self.file, tok.line, tok.col, end.end_line, end.end_col)

    def error(self, tok, message, code="syntax"):
        raise ParseError([Diagnostic("error", self.span(tok), message, code)])

    def _describe(self, tok):
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def expect(self, text):
        tok = self.peek()
        if not self.at(text):
            self.error(tok, f"expected {text!r}, found {self._describe(tok)}")
        return self.advance()

    def close(self, text, open_tok):
        """Expect the closing ``text``; at end of input blame the opener."""
        if self.peek().kind == "eof":
            self.error(open_tok, f"unclosed {open_tok.text!r}: expected {text!r} before end of input")
        return self.expect(text)

    def ident(self, what="identifier", numeric=False):
        tok = self.peek()
        if tok.kind == "id" or (numeric and tok.kind == "num"):
            return self.advance()
        self.error(tok, f"expected {what}, found {self._describe(tok)}")

    def last(self):
        return self.toks[self.i - 1]

    def enter(self, tok):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.error(tok, "nesting too deep", "limit")

    def leave(self):
        self.depth -= 1

    def sort_ref(self):
        tok = self.ident("sort name")
        if tok.text not in self.sorts:
            self.error(tok, f"sort {tok.text!r} is not declared (yet)", "forward-reference")
        return tok.text

    def new_symbol(self, tok):
        if tok.text in self.symbols or tok.text in self.sorts:
            self.error(tok, f"{tok.text!r} is already declared", "duplicate")
        self.symbols.add(tok.text)

    def new_named(self, kind, tok):
        key = (kind, tok.text)
        if key in self.named:
            self.error(tok, f"{kind} {tok.text!r} is already declared", "duplicate")
        self.named[key] = tok

    # document

    def document(self):
        decls = []
        while self.peek().kind != "eof":
            decls.append(self.decl())
        return Document(tuple(decls), self.file)

    def decl(self):
        tok = self.peek()
        handler = getattr(self, "d_" + tok.text, None) if tok.kind == "kw" else None
        if handler is None:
            self.error(tok, f"expected a declaration, found {self._describe(tok)}")
        self.advance()
        return handler(tok)

    def _opt_semi(self):
        self.accept(";")

    def d_sort(self, start):
        tok = self.ident("sort name")
        if tok.text in self.sorts or tok.text in self.symbols:
            self.error(tok, f"{tok.text!r} is already declared", "duplicate")
        self.sorts.add(tok.text)
        self._opt_semi()
        return SortDecl(tok.text, self.span(start, self.last()))

    def _sort_list(self):
        self.expect("(")
        sorts = []
        if not self.at(")"):
            sorts.append(self.sort_ref())
            while self.accept(","):
                sorts.append(self.sort_ref())
        self.expect(")")
        return tuple(sorts)

    def d_pred(self, start):
        tok = self.ident("predicate name")
        self.new_symbol(tok)
        sorts = self._sort_list()
        self._opt_semi()
        return PredDecl(tok.text, sorts, self.span(start, self.last()))

    def d_fn(self, start):
        tok = self.ident("function name")
        self.new_symbol(tok)
        args = self._sort_list()
        self.expect("->")
        result = self.sort_ref()
        self._opt_semi()
        return FnDecl(tok.text, args, result, self.span(start, self.last()))

    def d_const(self, start):
        tok = self.ident("constant name", numeric=True)
        self.new_symbol(tok)
        self.expect(":")
        sort = self.sort_ref()
        self._opt_semi()
        return ConstDecl(tok.text, sort, self.span(start, self.last()))

    def d_axiom(self, start):
        tok = self.ident("axiom name")
        self.new_named("axiom", tok)
        self.expect(":")
        f = self.formula()
        self.expect(";")
        return AxiomDecl(tok.text, f, self.span(start, self.last()))

    def meta_list(self):
        self.expect("[")
        metas = []
        seen = set()
        while True:
            tok = self.ident("metavariable name")
            if tok.text in seen:
                self.error(tok, f"metavariable {tok.text!r} declared twice", "duplicate")
            seen.add(tok.text)
            self.expect(":")
            kind_tok = self.peek()
            if kind_tok.kind == "id" and kind_tok.text == "formula":
                self.advance()
                kind = "formula"
            else:
                kind = self.sort_ref()
            metas.append(Meta(tok.text, kind))
            if not self.accept(","):
                break
        self.expect("]")
        return tuple(metas)

    def d_schema(self, start):
        tok = self.ident("schema name")
        self.new_named("schema", tok)
        metas = self.meta_list()
        self.expect(":")
        f = self.formula()
        self.expect(";")
        self.metas[("schema", tok.text)] = metas
        return SchemaDecl(tok.text, metas, f, self.span(start, self.last()))

    def _lemma(self, start, kind):
        tok = self.ident(f"{kind} name")
        self.new_named(kind, tok)
        metas = self.meta_list() if self.at("[") else ()
        self.expect(":")
        goal = self.formula()
        open_tok = self.expect("{")
        body = self.block(open_tok)
        self.metas[(kind, tok.text)] = metas
        return LemmaDecl(kind, tok.text, metas, goal, body, self.span(start, self.last()))

    def d_lemma(self, start):
        return self._lemma(start, "lemma")

    def d_proof(self, start):
        return self._lemma(start, "proof")

    def d_sequent(self, start):
        tok = self.ident("sequent name")
        self.new_named("sequent", tok)
        self.expect(":")
        prem, concl = self.sequent()
        self.expect(";")
        return SequentDecl(tok.text, prem, concl, self.span(start, self.last()))

    def d_indem(self, start):
        tok = self.ident("indemonstrable name")
        self.new_named("indem", tok)
        metas = self.meta_list() if self.at("[") else ()
        self.expect(":")
        prem, concl = self.sequent()
        self.expect(";")
        return IndemDecl(tok.text, metas, prem, concl, self.span(start, self.last()))

    def d_derive(self, start):
        tok = self.ident("derivation name")
        self.new_named("derive", tok)
        self.expect("{")
        steps = []
        labels = set()
        while not self.at("}"):
            step = self.step(labels)
            labels.add(step.label)
            steps.append(step)
        self.expect("}")
        return DeriveDecl(tok.text, tuple(steps), self.span(start, self.last()))

    def sequent(self):
        premises = []
        if not self.at("|-"):
            premises.append(self.formula())
            while self.accept(","):
                premises.append(self.formula())
        self.expect("|-")
        return tuple(premises), self.formula()

    def step(self, labels):
        start = self.ident("step label")
        if start.text in labels:
            self.error(start, f"step {start.text!r} declared twice", "duplicate")
        self.expect(":")
        prem, concl = self.sequent()
        self.expect("by")
        rule_tok = self.advance() if self.at("indem") else self.ident("derivation rule")
        rule = rule_tok.text
        name, refs, position = None, (), None
        if rule == "base":
            ntok = self.ident("sequent name")
            if ("sequent", ntok.text) not in self.named:
                self.error(ntok, f"sequent {ntok.text!r} is not declared (yet)", "forward-reference")
            name = ntok.text
        elif rule == "indem":
            name = self.ident("indemonstrable name").text
        elif rule == "cut":
            a = self.ident("step label").text
            self.expect(",")
            b = self.ident("step label").text
            refs = (a, b)
            if self.accept("@"):
                ptok = self.peek()
                if ptok.kind != "num":
                    self.error(ptok, "expected a premise position")
                position = int(self.advance().text)
        else:
            self.error(rule_tok, f"unknown derivation rule {rule!r}", "unknown-rule")
        self.expect(";")
        return Step(start.text, prem, concl, rule, name, refs, position, self.span(start, self.last()))

    # proofs

    def block(self, open_tok):
        self.enter(open_tok)
        hyp = eigen = None
        while self.at("assume") or self.at("fix"):
            kw = self.advance()
            if kw.text == "assume":
                if hyp is not None:
                    self.error(kw, "a block opens at most one assumption")
                label = self.ident("label")
                self.expect(":")
                f = self.formula()
                self.expect(";")
                hyp = Line(label.text, f, HYP, self.span(label, self.last()))
            else:
                if eigen is not None:
                    self.error(kw, "a block fixes at most one constant")
                name = self.ident("constant name")
                self.expect(":")
                eigen = (name.text, self.sort_ref())
                self.expect(";")
        entries = []
        while not self.at("}"):
            tok = self.peek()
            if self.at("{"):
                entries.append(self.block(self.advance()))
            elif self.at("assume") or self.at("fix"):
                self.error(tok, f"'{tok.text}' may only open a block")
            elif tok.kind == "eof":
                self.error(open_tok, "unclosed '{': expected '}' before end of input")
            else:
                entries.append(self.line())
        close = self.expect("}")
        self.leave()
        return Block(tuple(entries), hyp, eigen, self.span(open_tok, close))

    def line(self):
        label = self.ident("line label")
        self.expect(":")
        f = self.formula()
        self.expect("by")
        just = self.justification()
        self.expect(";")
        return Line(label.text, f, just, self.span(label, self.last()))

    def justification(self):
        if any(self.at(k) for k in NAMED_RULES):
            rule_tok = self.advance()
        else:
            rule_tok = self.ident("rule name")
        rule = rule_tok.text
        if rule not in RULES or rule == "hyp":
            self.error(rule_tok, f"unknown rule {rule!r}", "unknown-rule")
        if rule in NAMED_RULES:
            ntok = self.ident(f"{rule} name")
            if (rule, ntok.text) not in self.named:
                self.error(ntok, f"{rule} {ntok.text!r} is not declared (yet)", "forward-reference")
            bindings = ()
            if self.at("["):
                if rule == "axiom":
                    self.error(self.peek(), "axioms take no bindings")
                bindings = self.bindings(self.metas.get((rule, ntok.text), ()))
            return Justification(rule, name=ntok.text, bindings=bindings)
        refs = []
        if self.peek().kind == "id":
            refs.append(self.ref())
            while self.accept(","):
                refs.append(self.ref())
        arg = None
        if self.accept("["):
            arg = self.formula() if rule in FORMULA_ARG_RULES else self.term()
            self.expect("]")
        return Justification(rule, tuple(refs), arg=arg)

    def ref(self):
        a = self.ident("label")
        if self.accept("-"):
            b = self.ident("label")
            return BlockRef(a.text, b.text)
        return a.text

    def bindings(self, metas):
        kinds = {m.name: m.kind for m in metas}
        self.expect("[")
        out = []
        while True:
            tok = self.ident("metavariable name")
            if tok.text not in kinds:
                self.error(tok, f"no metavariable named {tok.text!r}", "unknown-meta")
            self.expect(":=")
            value = self.formula() if kinds[tok.text] == "formula" else self.term()
            out.append((tok.text, value))
            if not self.accept(","):
                break
        self.expect("]")
        return tuple(out)

    # formulas

    def formula(self):
        tok = self.peek()
        self.enter(tok)
        parts = [self.disj()]
        while self.accept("->"):
            parts.append(self.disj())
        if len(parts) + self.depth > MAX_DEPTH:
            self.error(tok, "formula nesting too deep", "limit")
        f = parts[-1]
        for p in reversed(parts[:-1]):
            f = Implies(p, f)
        self.leave()
        return f

    def disj(self):
        tok = self.peek()
        f = self.conj()
        n = 1
        while self.accept("|"):
            f = Or(f, self.conj())
            n += 1
            if n + self.depth > MAX_DEPTH:
                self.error(tok, "formula nesting too deep", "limit")
        return f

    def conj(self):
        tok = self.peek()
        f = self.unary()
        n = 1
        while self.accept("&"):
            f = And(f, self.unary())
            n += 1
            if n + self.depth > MAX_DEPTH:
                self.error(tok, "formula nesting too deep", "limit")
        return f

    def unary(self):
        tok = self.peek()
        nots = 0
        while self.accept("~"):
            nots += 1
        if nots + self.depth > MAX_DEPTH:
            self.error(tok, "formula nesting too deep", "limit")
        if self.at("all") or self.at("ex"):
            f = self.quantified()
        else:
            f = self.primary()
        for _ in range(nots):
            f = Not(f)
        return f

    def quantified(self):
        kw = self.advance()
        cls = Forall if kw.text == "all" else Exists
        binders = []
        while True:
            name = self.ident("bound variable")
            self.expect(":")
            binders.append((name.text, self.sort_ref()))
            if not self.accept(","):
                break
        self.expect(".")
        self.scopes.append(dict(binders) if len({b[0] for b in binders}) == len(binders) else None)
        if self.scopes[-1] is None:
            self.scopes.pop()
            self.error(kw, "a variable is bound twice in one quantifier head")
        self.enter(kw)
        try:
            body = self.formula()
        finally:
            self.scopes.pop()
        self.leave()
        for name, sort in reversed(binders):
            body = cls(name, sort, body)
        return body

    def primary(self):
        tok = self.peek()
        if self.accept("("):
            self.enter(tok)
            f = self.formula()
            self.close(")", tok)
            self.leave()
            return f
        if self.accept("false"):
            return FALSUM
        if tok.kind in ("id", "num"):
            self.advance()
            args = self.term_args() if self.at("(") else None
            if self.at("=") or self.at("!="):
                op = self.advance().text
                lhs = self._make_term(tok.text, args)
                atom = eq(lhs, self.term())
                return atom if op == "=" else Not(atom)
            if tok.kind == "num":
                self.error(self.peek(), f"expected '=' or '!=' after {tok.text}")
            return Atom(tok.text, tuple(args or ()))
        self.error(tok, f"expected a formula, found {self._describe(tok)}")

    def _lookup_var(self, name):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def _make_term(self, name, args):
        if args is None:
            sort = self._lookup_var(name)
            return Var(name, sort) if sort is not None else Const(name)
        return App(name, tuple(args))

    def term_args(self):
        open_tok = self.expect("(")
        self.enter(open_tok)
        args = []
        if not self.at(")"):
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
        self.close(")", open_tok)
        self.leave()
        return args

    def term(self):
        tok = self.ident("term", numeric=True)
        args = self.term_args() if self.at("(") else None
        return self._make_term(tok.text, args)


def parse_document(text, file="<input>") -> Document:
    """Parse a whole ``.anc`` document; raises ParseError with diagnostics."""
    return _Parser(text, file).document()


def parse_formula(text, sorts=None, file="<formula>"):
    """Parse a single formula.  ``sorts`` lists the sort names in scope."""
    p = _Parser(text, file)
    p.sorts = set(sorts or ())
    f = p.formula()
    tok = p.peek()
    if tok.kind != "eof":
        p.error(tok, f"unexpected {p._describe(tok)} after formula")
    return f


def parse_term(text, sorts=None, file="<term>"):
    p = _Parser(text, file)
    p.sorts = set(sorts or ())
    t = p.term()
    if p.peek().kind != "eof":
        p.error(p.peek(), "unexpected input after term")
    return t


# -- renderer --------------------------------------------------------------

def _metas(metas):
    return "[" + ", ".join(f"{m.name}: {m.kind}" for m in metas) + "]"


def _sequent(premises, conclusion):
    prem = ", ".join(format_formula(p) for p in premises)
    return f"{prem} |- {format_formula(conclusion)}" if prem else f"|- {format_formula(conclusion)}"


def _render_block(block, indent, out):
    pad = "  " * indent
    if block.eigen is not None:
        out.append(f"{pad}fix {block.eigen[0]} : {block.eigen[1]};")
    if block.hyp is not None:
        out.append(f"{pad}assume {block.hyp.label} : {format_formula(block.hyp.formula)};")
    for e in block.entries:
        if isinstance(e, Block):
            out.append(pad + "{")
            _render_block(e, indent + 1, out)
            out.append(pad + "}")
        else:
            out.append(f"{pad}{e.label} : {format_formula(e.formula)} by {e.just};")


def render_decl(d) -> str:
    if isinstance(d, SortDecl):
        return f"sort {d.name}"
    if isinstance(d, PredDecl):
        return f"pred {d.name}({', '.join(d.sorts)})"
    if isinstance(d, FnDecl):
        return f"fn {d.name}({', '.join(d.args)}) -> {d.result}"
    if isinstance(d, ConstDecl):
        return f"const {d.name} : {d.sort}"
    if isinstance(d, AxiomDecl):
        return f"axiom {d.name} : {format_formula(d.formula)};"
    if isinstance(d, SchemaDecl):
        return f"schema {d.name} {_metas(d.metas)} : {format_formula(d.formula)};"
    if isinstance(d, LemmaDecl):
        metas = f" {_metas(d.metas)}" if d.metas else ""
        out = [f"{d.kind} {d.name}{metas} : {format_formula(d.goal)} {{"]
        _render_block(d.body, 1, out)
        out.append("}")
        return "\n".join(out)
    if isinstance(d, SequentDecl):
        return f"sequent {d.name} : {_sequent(d.premises, d.conclusion)};"
    if isinstance(d, IndemDecl):
        metas = f" {_metas(d.metas)}" if d.metas else ""
        return f"indem {d.name}{metas} : {_sequent(d.premises, d.conclusion)};"
    if isinstance(d, DeriveDecl):
        out = [f"derive {d.name} {{"]
        for s in d.steps:
            if s.rule == "cut":
                how = f"cut {s.refs[0]}, {s.refs[1]}" + (f" @ {s.position}" if s.position is not None else "")
            else:
                how = f"{s.rule} {s.name}"
            out.append(f"  {s.label} : {_sequent(s.premises, s.conclusion)} by {how};")
        out.append("}")
        return "\n".join(out)
    raise TypeError(f"not a declaration: {d!r}")


def render_document(doc: Document) -> str:
    """Canonical text: one declaration per line, two-space block indent."""
    return "".join(render_decl(d) + "\n" for d in doc.decls)


def render_term(t) -> str:
    return format_term(t)
