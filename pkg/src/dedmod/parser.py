"""Concrete syntax: theory files (.dmt), proof files (.dmp) and single expressions.

Parsing goes through a small AST so that the sorts of variables that are
not annotated can be inferred from the argument positions they occupy
before anything is built.  The grammar is documented in ``docs/grammar.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import proofterm as P
from .arith import build_HA, numeral
from .rewrite import Equation, Orientation, PropRule, RewriteSystem, TermRule
from .syntax import (
    BOT,
    IOTA,
    TOP,
    And,
    Apply,
    Atom,
    ComprehensionSymbol,
    Exists,
    Forall,
    FunctionSymbol,
    Implies,
    Or,
    PredicateSymbol,
    Prop,
    Signature,
    Sort,
    SortError,
    Term,
    Var,
    class_arity,
)


class ParseError(Exception):
    """A diagnostic with 1-based line and column."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message}"


# ---------------------------------------------------------------------------
# Lexing

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<kw>prop-rule\b|fun!)
  | (?P<num>\d+)
  | (?P<id>[^\W\d][\w']*)
  | (?P<sym>-->|=>|:=|->|/\\|\\/|@!|[@<>(){}|,;.:=+*]|[⟶⇒→∧∨×∀∃⊤⊥⟨⟩])
    """,
    re.X,
)

_UNICODE = {
    "⟶": "-->",
    "⇒": "=>",
    "→": "->",
    "∧": "/\\",
    "∨": "\\/",
    "×": "*",
    "∀": "forall",
    "∃": "exists",
    "⊤": "top",
    "⊥": "bot",
    "⟨": "<",
    "⟩": ">",
}


@dataclass(frozen=True)
class Token:
    kind: str  # id, num, sym, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        s = m.group()
        col = pos - start + 1
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind in ("id", "num"):
            out.append(Token(kind, s, line, col))
        elif kind == "kw":
            out.append(Token("id", s, line, col))
        elif kind == "sym":
            u = _UNICODE.get(s, s)
            out.append(Token("id" if u.isalpha() else "sym", u, line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


# ---------------------------------------------------------------------------
# AST (plain tuples; the last element is always the position token)

_RESERVED = frozenset(
    "forall exists top bot fun fun! ax I efq fst snd inl inr case pack unpack "
    "proof rule prop-rule eq sort pred prelude flag orient".split()
)


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.toks = tokenize(text)
        self.pos = 0
        self.sig = sig

    # token helpers -------------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("sym", "id") and t.text == text

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        t = self.peek()
        if not self.at(text):
            self.error(f"expected '{text}', found {self.describe(t)}", t)
        return self.next()

    def ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "id" or t.text in _RESERVED:
            self.error(f"expected {what}, found {self.describe(t)}", t)
        return self.next()

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else f"'{t.text}'"

    @staticmethod
    def error(msg: str, t: Token):
        raise ParseError(msg, t.line, t.col)

    # sorts ---------------------------------------------------------------

    def sort_name(self) -> Token:
        t = self.peek()
        if t.kind != "id":
            self.error(f"expected a sort, found {self.describe(t)}", t)
        return self.next()

    def sort(self, tok: Token) -> Sort:
        s = self.sig.sorts.get(tok.text)
        if s is not None:
            return s
        if class_arity(Sort(tok.text)) is not None:
            s = Sort(tok.text)
            self.sig.add_sort(s)
            return s
        self.error(f"unknown sort {tok.text}", tok)

    # terms ---------------------------------------------------------------

    def term(self):
        left = self.product()
        while self.at("+"):
            tok = self.next()
            left = ("op", "plus", left, self.product(), tok)
        return left

    def product(self):
        left = self.primary_term()
        while self.at("*"):
            tok = self.next()
            left = ("op", "times", left, self.primary_term(), tok)
        return left

    def primary_term(self):
        t = self.peek()
        if t.kind == "num":
            self.next()
            return ("num", int(t.text), t)
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        if self.at("{"):
            return self.class_term()
        if t.kind == "id" and t.text not in _RESERVED:
            self.next()
            if self.accept("("):
                args = self.term_list(")")
                return ("app", t.text, args, t)
            return ("var", t.text, t)
        self.error(f"expected a term, found {self.describe(t)}", t)

    def term_list(self, close: str):
        args = []
        if not self.accept(close):
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
            self.expect(close)
        return args

    def binders(self, stop: str):
        out = []
        while not self.at(stop):
            name = self.ident("a variable")
            sort = None
            if self.accept(":"):
                sort = self.sort_name()
            out.append((name.text, sort, name))
        return out

    def class_term(self):
        tok = self.expect("{")
        bound = self.binders("|")
        self.expect("|")
        params = self.binders("|")
        self.expect("|")
        body = self.prop()
        self.expect("}")
        args = None
        if self.accept("("):
            args = self.term_list(")")
        return ("class", bound, params, body, args, tok)

    # propositions --------------------------------------------------------

    def prop(self, allow_imp: bool = True):
        t = self.peek()
        if self.at("forall") or self.at("exists"):
            self.next()
            name = self.ident("a bound variable")
            sort = None
            if self.accept(":"):
                sort = self.sort_name()
            self.expect(",")
            body = self.prop()
            cls = Forall if t.text == "forall" else Exists
            return ("quant", cls, name.text, sort, body, t)
        left = self.disjunction()
        if allow_imp and self.at("=>"):
            tok = self.next()
            return ("bin", Implies, left, self.prop(), tok)
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.at("\\/"):
            tok = self.next()
            left = ("bin", Or, left, self.conjunction(), tok)
        return left

    def conjunction(self):
        left = self.primary_prop()
        while self.at("/\\"):
            tok = self.next()
            left = ("bin", And, left, self.primary_prop(), tok)
        return left

    def primary_prop(self):
        t = self.peek()
        if self.at("forall") or self.at("exists"):
            return self.prop()
        if self.accept("top"):
            return ("top", t)
        if self.accept("bot"):
            return ("bot", t)
        if self.at("("):
            save = self.pos
            try:
                self.next()
                inner = self.prop()
                self.expect(")")
                if not self.at("="):
                    return inner
            except ParseError:
                pass
            self.pos = save
        if t.kind == "id" and t.text in self.sig.predicates and not self.at("=", 1):
            self.next()
            args = []
            if self.accept("("):
                args = self.term_list(")")
            return ("atom", t.text, args, t)
        left = self.term()
        tok = self.peek()
        if not self.at("="):
            self.error(f"expected a proposition, found {self.describe(tok)}", tok)
        self.next()
        return ("eq", left, self.term(), tok)

    # proofs --------------------------------------------------------------
    # Proof ASTs carry term/prop ASTs; they are elaborated afterwards.

    def proof(self):
        t = self.peek()
        if self.at("fun"):
            self.next()
            name = self.ident("a proof variable")
            dom = None
            if self.accept(":"):
                dom = self.prop(allow_imp=False)
            self.expect("=>")
            return ("lam", name.text, dom, self.proof(), t)
        if self.at("fun!"):
            self.next()
            name = self.ident("a term variable")
            sort = None
            if self.accept(":"):
                sort = self.sort_name()
            self.expect("=>")
            return ("Lam", name.text, sort, self.proof(), t)
        return self.application()

    def application(self):
        left = self.prefix()
        while True:
            tok = self.peek()
            if self.accept("@!"):
                left = ("tapp", left, self.term(), tok)
            elif self.accept("@"):
                left = ("app", left, self.prefix(), tok)
            else:
                return left

    def prefix(self):
        t = self.peek()
        if self.at("fst") or self.at("snd"):
            self.next()
            return (t.text, self.prefix(), t)
        if self.at("inl") or self.at("inr"):
            self.next()
            inner = self.prefix()
            ann = self.prop() if self.accept(":") else None
            return (t.text, inner, ann, t)
        if self.at("pack"):
            self.next()
            self.expect("(")
            w = self.term()
            self.expect(",")
            inner = self.proof()
            self.expect(")")
            ann = self.prop() if self.accept(":") else None
            return ("pack", w, inner, ann, t)
        return self.atomic_proof()

    def atomic_proof(self):
        t = self.peek()
        if self.accept("ax"):
            name = self.peek()
            if name.kind != "id":
                self.error(f"expected a proof variable, found {self.describe(name)}", name)
            self.next()
            return ("pvar", name.text, t)
        if self.accept("I"):
            return ("I", t)
        if self.accept("efq"):
            self.expect("(")
            inner = self.proof()
            target = self.prop() if self.accept(":") else None
            self.expect(")")
            return ("efq", inner, target, t)
        if self.accept("<"):
            a = self.proof()
            self.expect(",")
            b = self.proof()
            self.expect(">")
            return ("pair", a, b, t)
        if self.accept("case"):
            self.expect("(")
            s = self.proof()
            self.expect(";")
            a = self.ident("a proof variable").text
            self.expect(".")
            left = self.proof()
            self.expect(";")
            b = self.ident("a proof variable").text
            self.expect(".")
            right = self.proof()
            self.expect(")")
            return ("case", s, a, left, b, right, t)
        if self.accept("unpack"):
            self.expect("(")
            s = self.proof()
            self.expect(";")
            x = self.ident("a term variable").text
            sort = None
            if self.accept(":"):
                sort = self.sort_name()
            a = self.ident("a proof variable").text
            self.expect(".")
            body = self.proof()
            self.expect(")")
            return ("unpack", s, x, sort, a, body, t)
        if self.accept("("):
            inner = self.proof()
            self.expect(")")
            return inner
        if t.kind == "id" and t.text not in _RESERVED:
            self.next()
            return ("pvar", t.text, t)
        self.error(f"expected a proof, found {self.describe(t)}", t)


# ---------------------------------------------------------------------------
# Elaboration


class _Elab:
    def __init__(self, sig: Signature, sorts: "_Parser", implicit_functions: bool = False):
        self.sig = sig
        self.sorts = sorts  # for resolving sort names
        self.implicit_functions = implicit_functions

    def err(self, msg, tok):
        raise ParseError(msg, tok.line, tok.col)

    def _const(self, name):
        f = self.sig.functions.get(name)
        return f if f is not None and f.arity == 0 else None

    # sort inference ------------------------------------------------------

    def uses(self, ast, name: str, want: Optional[Sort]):
        """Yield (sort, token) for each free occurrence of variable ``name``."""
        kind = ast[0]
        if kind == "var":
            if ast[1] == name and want is not None:
                yield want, ast[-1]
        elif kind == "app":
            f = self.sig.functions.get(ast[1])
            for i, a in enumerate(ast[2]):
                s = f.args[i] if f is not None and i < f.arity else (IOTA if f is None else None)
                yield from self.uses(a, name, s)
        elif kind == "op":
            yield from self.uses(ast[2], name, IOTA)
            yield from self.uses(ast[3], name, IOTA)
        elif kind == "class":
            _, bound, params, body, args, tok = ast
            psorts = self._param_sorts(params, body)
            if args is None:
                for (pname, _, ptok), s in zip(params, psorts):
                    if pname == name:
                        yield s, ptok
            else:
                for i, a in enumerate(args):
                    yield from self.uses(a, name, psorts[i] if i < len(psorts) else None)
        elif kind == "atom":
            p = self.sig.predicates.get(ast[1])
            for i, a in enumerate(ast[2]):
                s = p.args[i] if p is not None and i < p.arity else None
                yield from self.uses(a, name, s)
        elif kind == "eq":
            p = self.sig.predicates.get("=")
            s = p.args[0] if p is not None else IOTA
            yield from self.uses(ast[1], name, s)
            yield from self.uses(ast[2], name, s)
        elif kind == "bin":
            yield from self.uses(ast[2], name, None)
            yield from self.uses(ast[3], name, None)
        elif kind == "quant":
            if ast[2] != name:
                yield from self.uses(ast[4], name, None)

    def infer(self, name: str, asts, default: Sort = IOTA) -> Sort:
        found = {}
        for a in asts:
            for s, tok in self.uses(a, name, None):
                found.setdefault(s, tok)
        if len(found) > 1:
            tok = list(found.values())[1]
            self.err(
                f"sort mismatch: variable {name} used at sorts "
                + ", ".join(sorted(s.name for s in found)),
                tok,
            )
        return next(iter(found), default)

    def free_names(self, ast, bound: frozenset, out: dict):
        """Free variable names (in order of first occurrence) mapped to their first token."""
        kind = ast[0]
        if kind == "var":
            if ast[1] not in bound and self._const(ast[1]) is None:
                out.setdefault(ast[1], ast[-1])
        elif kind == "app":
            for a in ast[2]:
                self.free_names(a, bound, out)
        elif kind == "op":
            self.free_names(ast[2], bound, out)
            self.free_names(ast[3], bound, out)
        elif kind == "class":
            _, bound_vs, params, body, args, tok = ast
            if args is None:
                for pname, _, ptok in params:
                    if pname not in bound:
                        out.setdefault(pname, ptok)
            else:
                for a in args:
                    self.free_names(a, bound, out)
        elif kind in ("atom",):
            for a in ast[2]:
                self.free_names(a, bound, out)
        elif kind == "eq":
            self.free_names(ast[1], bound, out)
            self.free_names(ast[2], bound, out)
        elif kind == "bin":
            self.free_names(ast[2], bound, out)
            self.free_names(ast[3], bound, out)
        elif kind == "quant":
            self.free_names(ast[4], bound | {ast[2]}, out)
        return out

    def _param_sorts(self, params, body):
        out = []
        for pname, sort, _ in params:
            out.append(self.sorts.sort(sort) if sort is not None else self.infer(pname, [body]))
        return out

    # building ------------------------------------------------------------

    def term(self, ast, env: dict) -> Term:
        kind = ast[0]
        tok = ast[-1]
        if kind == "var":
            v = env.get(ast[1])
            if v is not None:
                return v
            c = self._const(ast[1])
            if c is not None:
                return Apply(c)
            if ast[1] in self.sig.functions:
                self.err(f"function symbol {ast[1]} needs arguments", tok)
            self.err(f"unbound variable {ast[1]}", tok)
        if kind == "num":
            for s in ("0", "S"):
                if s not in self.sig.functions:
                    self.err("numerals need the symbols 0 and S", tok)
            return numeral(ast[1])
        if kind == "op":
            f = self.sig.functions.get(ast[1])
            if f is None:
                self.err(f"unknown function symbol {ast[1]}", tok)
            return self._apply(f, [ast[2], ast[3]], env, tok)
        if kind == "app":
            f = self.sig.functions.get(ast[1])
            if f is None:
                if not self.implicit_functions:
                    self.err(f"unknown function symbol {ast[1]}", tok)
                f = FunctionSymbol(ast[1], (IOTA,) * len(ast[2]), IOTA)
                self.sig.add_function(f)
            return self._apply(f, ast[2], env, tok)
        if kind == "class":
            return self.class_term(ast, env)
        self.err("expected a term", tok)

    def _apply(self, f, args, env, tok) -> Term:
        if len(args) != f.arity:
            self.err(
                f"arity mismatch: {f.name} expects {f.arity} arguments, got {len(args)}", tok
            )
        out = []
        for a, s in zip(args, f.args):
            t = self.term(a, env)
            if t.sort != s:
                self.err(
                    f"sort mismatch: argument {t} of {f.name} has sort {t.sort}, expected {s}",
                    a[-1],
                )
            out.append(t)
        return Apply(f, tuple(out))

    def class_term(self, ast, env) -> Term:
        _, bound, params, body, args, tok = ast
        bvs = []
        for name, sort, btok in bound:
            s = self.sorts.sort(sort) if sort is not None else IOTA
            if s != IOTA:
                self.err(f"class variable {name} must have sort iota", btok)
            bvs.append(Var(name, s))
        pvs = [Var(n, s) for (n, _, _), s in zip(params, self._param_sorts(params, body))]
        inner = {v.name: v for v in bvs + pvs}
        b = self.prop(body, inner)
        try:
            c = ComprehensionSymbol(bvs, pvs, b)
        except SortError as e:
            self.err(str(e), tok)
        if args is None:
            actual = []
            for v, (_, _, ptok) in zip(pvs, params):
                w = env.get(v.name)
                if w is None:
                    self.err(f"unbound variable {v.name}", ptok)
                if w.sort != v.sort:
                    self.err(f"sort mismatch: {v.name} has sort {w.sort}, expected {v.sort}", ptok)
                actual.append(w)
            return Apply(c, tuple(actual))
        return self._apply(c, args, env, tok)

    def prop(self, ast, env: dict) -> Prop:
        kind = ast[0]
        tok = ast[-1]
        if kind == "top":
            return TOP
        if kind == "bot":
            return BOT
        if kind == "atom":
            p = self.sig.predicates.get(ast[1])
            if p is None:
                self.err(f"unknown predicate symbol {ast[1]}", tok)
            return self._atom(p, ast[2], env, tok)
        if kind == "eq":
            p = self.sig.predicates.get("=")
            if p is None:
                self.err("equality is not declared in this theory", tok)
            return self._atom(p, [ast[1], ast[2]], env, tok)
        if kind == "bin":
            return ast[1](self.prop(ast[2], env), self.prop(ast[3], env))
        if kind == "quant":
            _, cls, name, sort, body, _ = ast
            s = self.sorts.sort(sort) if sort is not None else self.infer(name, [body])
            v = Var(name, s)
            inner = dict(env)
            inner[name] = v
            return cls(v, self.prop(body, inner))
        self.err("expected a proposition", tok)

    def _atom(self, p: PredicateSymbol, args, env, tok) -> Atom:
        if len(args) != p.arity:
            self.err(
                f"arity mismatch: {p.name} expects {p.arity} arguments, got {len(args)}", tok
            )
        out = []
        for a, s in zip(args, p.args):
            t = self.term(a, env)
            if t.sort != s:
                self.err(
                    f"sort mismatch: argument {t} of {p.name} has sort {t.sort}, expected {s}",
                    a[-1],
                )
            out.append(t)
        return Atom(p, tuple(out))

    def open_env(self, asts, env: dict, allow_free: bool) -> dict:
        """``env`` extended with the free variables of ``asts``, sorts inferred."""
        free: dict = {}
        for a in asts:
            self.free_names(a, frozenset(env), free)
        if free and not allow_free:
            name, tok = next(iter(free.items()))
            self.err(f"unbound variable {name}", tok)
        out = dict(env)
        for name in free:
            out[name] = Var(name, self.infer(name, asts))
        return out

    # proofs --------------------------------------------------------------

    def proof(self, ast, tenv: dict, allow_free: bool) -> P.ProofTerm:
        kind = ast[0]
        go = lambda a, e=tenv: self.proof(a, e, allow_free)  # noqa: E731

        def term(a):
            return self.term(a, self.open_env([a], tenv, allow_free))

        def prop(a):
            if a is None:
                return None
            return self.prop(a, self.open_env([a], tenv, allow_free))

        if kind == "pvar":
            return P.ProofVar(ast[1])
        if kind == "I":
            return P.I
        if kind == "efq":
            return P.BotElim(go(ast[1]), prop(ast[2]))
        if kind == "pair":
            return P.Pair(go(ast[1]), go(ast[2]))
        if kind == "fst":
            return P.Fst(go(ast[1]))
        if kind == "snd":
            return P.Snd(go(ast[1]))
        if kind in ("inl", "inr"):
            cls = P.Inl if kind == "inl" else P.Inr
            return cls(go(ast[1]), prop(ast[2]))
        if kind == "case":
            _, s, a, left, b, right, _ = ast
            return P.Case(go(s), a, go(left), b, go(right))
        if kind == "lam":
            return P.ImpIntro(ast[1], prop(ast[2]), go(ast[3]))
        if kind == "app":
            return P.App(go(ast[1]), go(ast[2]))
        if kind == "Lam":
            _, name, sort, body, _ = ast
            v = Var(name, self.sorts.sort(sort) if sort is not None else IOTA)
            return P.AllIntro(v, go(body, {**tenv, name: v}))
        if kind == "tapp":
            return P.TApp(go(ast[1]), term(ast[2]))
        if kind == "pack":
            return P.Pack(term(ast[1]), go(ast[2]), prop(ast[3]))
        if kind == "unpack":
            _, s, x, sort, a, body, _ = ast
            v = Var(x, self.sorts.sort(sort) if sort is not None else IOTA)
            return P.Unpack(go(s), v, a, go(body, {**tenv, x: v}))
        raise AssertionError(kind)


# ---------------------------------------------------------------------------
# Files


@dataclass
class Theory:
    signature: Signature
    term_rules: list = field(default_factory=list)
    prop_rules: list = field(default_factory=list)
    equations: list = field(default_factory=list)
    comprehension: bool = False
    impredicative: bool = False
    prelude: Optional[str] = None

    @property
    def system(self) -> RewriteSystem:
        return RewriteSystem(
            term_rules=tuple(self.term_rules),
            prop_rules=tuple(self.prop_rules),
            equations=tuple(self.equations),
            comprehension=self.comprehension,
            impredicative=self.impredicative,
            signature=self.signature,
        )

    @property
    def rule_count(self) -> int:
        return self.system.rule_count


@dataclass(frozen=True)
class ProofItem:
    name: str
    statement: Prop
    proof: P.ProofTerm
    line: int = 0


def _theory_decl(p: _Parser, th: Theory, counter: dict):
    kw = p.peek()
    sig = th.signature
    el = _Elab(sig, p)
    if p.accept("prelude"):
        name = p.ident("a prelude name")
        if name.text != "HA":
            p.error(f"unknown prelude {name.text}", name)
        if th.prelude is not None or th.term_rules or th.prop_rules or th.equations:
            p.error("prelude must come first", kw)
        ha = build_HA(th.impredicative)
        th.signature = sig = ha.signature.copy()
        th.term_rules.extend(ha.ha2)
        th.prop_rules.extend(ha.prop_rules)
        th.comprehension = True
        th.prelude = "HA"
    elif p.accept("sort"):
        name = p.ident("a sort name")
        sig.add_sort(Sort(name.text))
    elif p.accept("fun"):
        name = p.peek()
        if name.kind not in ("id", "num"):
            p.error(f"expected a function name, found {p.describe(name)}", name)
        p.next()
        p.expect(":")
        sorts = [p.sort(p.sort_name())]
        while p.accept(","):
            sorts.append(p.sort(p.sort_name()))
        if p.accept("->"):
            result = p.sort(p.sort_name())
            args = tuple(sorts)
        elif len(sorts) == 1:
            result, args = sorts[0], ()
        else:
            t = p.peek()
            p.error(f"expected '->', found {p.describe(t)}", t)
        try:
            sig.add_function(FunctionSymbol(name.text, args, result))
        except SortError as e:
            p.error(str(e), name)
    elif p.accept("pred"):
        name = p.peek()
        if name.kind not in ("id", "sym") or name.text in _RESERVED:
            p.error(f"expected a predicate name, found {p.describe(name)}", name)
        p.next()
        args = []
        if p.accept(":"):
            args.append(p.sort(p.sort_name()))
            while p.accept(","):
                args.append(p.sort(p.sort_name()))
        try:
            sig.add_predicate(PredicateSymbol(name.text, tuple(args)))
        except SortError as e:
            p.error(str(e), name)
    elif p.accept("rule"):
        lhs = p.term()
        p.expect("-->")
        rhs = p.term()
        env = el.open_env([lhs, rhs], {}, True)
        try:
            counter["rule"] += 1
            th.term_rules.append(
                TermRule(el.term(lhs, env), el.term(rhs, env), f"rule{counter['rule']}")
            )
        except SortError as e:
            p.error(str(e), kw)
    elif p.accept("prop-rule"):
        lhs = p.prop()
        p.expect("-->")
        rhs = p.prop()
        env = el.open_env([lhs, rhs], {}, True)
        left = el.prop(lhs, env)
        if not isinstance(left, Atom):
            p.error("the left-hand side of a proposition rule must be an atom", kw)
        try:
            counter["prop"] += 1
            th.prop_rules.append(PropRule(left, el.prop(rhs, env), f"prop-rule{counter['prop']}"))
        except SortError as e:
            p.error(str(e), kw)
    elif p.accept("eq"):
        el = _Elab(sig, p, implicit_functions=True)
        lhs = p.term()
        p.expect("=")
        rhs = p.term()
        orient = Orientation.LTR
        if p.accept("orient"):
            o = p.ident("ltr, rtl or none")
            try:
                orient = Orientation(o.text)
            except ValueError:
                p.error(f"unknown orientation {o.text}", o)
        env = el.open_env([lhs, rhs], {}, True)
        try:
            counter["eq"] += 1
            e = Equation(el.term(lhs, env), el.term(rhs, env), orient, f"eq{counter['eq']}")
            e.oriented_rule()
        except SortError as err:
            p.error(str(err), kw)
        th.equations.append(e)
    elif p.accept("flag"):
        f = p.ident("a flag")
        if f.text != "impredicative":
            p.error(f"unknown flag {f.text}", f)
        th.impredicative = True
    else:
        p.error(f"expected a declaration, found {p.describe(kw)}", kw)


def parse_theory(text: str) -> Theory:
    """Parse a ``.dmt`` file; raises :class:`ParseError` with position."""
    th = Theory(Signature.empty())
    th.signature.add_sort(IOTA)
    p = _Parser(text, th.signature)
    counter = {"rule": 0, "prop": 0, "eq": 0}
    while p.peek().kind != "eof":
        _theory_decl(p, th, counter)
        p.sig = th.signature
    return th


def parse_proofs(text: str, theory: Theory | Signature) -> list[ProofItem]:
    """Parse a ``.dmp`` file of ``proof NAME : PROP := TERM`` items."""
    sig = theory.signature if isinstance(theory, Theory) else theory
    p = _Parser(text, sig)
    el = _Elab(sig, p)
    items = []
    seen = set()
    while p.peek().kind != "eof":
        kw = p.expect("proof")
        name = p.ident("a proof name")
        if name.text in seen:
            p.error(f"proof {name.text} defined twice", name)
        seen.add(name.text)
        p.expect(":")
        stmt_ast = p.prop()
        p.expect(":=")
        proof_ast = p.proof()
        if p.peek().kind != "eof" and not p.at("proof"):
            t = p.peek()
            p.error(f"unexpected {p.describe(t)} after proof", t)
        stmt = el.prop(stmt_ast, el.open_env([stmt_ast], {}, False))
        items.append(ProofItem(name.text, stmt, el.proof(proof_ast, {}, False), kw.line))
    return items


def resolve(items: list[ProofItem], name: str) -> P.ProofTerm:
    """The named proof with earlier items substituted for their names.

    Raises ``KeyError`` when no item has that name.
    """
    done: dict = {}
    for it in items:
        done[it.name] = P.substitute(it.proof, dict(done))
        if it.name == name:
            return done[name]
    raise KeyError(name)


def _single(text: str, sig: Signature, rule):
    p = _Parser(text, sig)
    ast = rule(p)
    t = p.peek()
    if t.kind != "eof":
        p.error(f"unexpected {p.describe(t)}", t)
    return p, _Elab(sig, p), ast


def parse_term(text: str, sig: Signature, allow_free: bool = True) -> Term:
    p, el, ast = _single(text, sig, _Parser.term)
    return el.term(ast, el.open_env([ast], {}, allow_free))


def parse_prop(text: str, sig: Signature, allow_free: bool = True) -> Prop:
    p, el, ast = _single(text, sig, _Parser.prop)
    return el.prop(ast, el.open_env([ast], {}, allow_free))


def parse_proof(text: str, sig: Signature, allow_free: bool = True) -> P.ProofTerm:
    p, el, ast = _single(text, sig, _Parser.proof)
    return el.proof(ast, {}, allow_free)

