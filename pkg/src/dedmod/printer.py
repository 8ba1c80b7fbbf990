"""Concrete syntax output; everything printed here parses back to an alpha-equal value."""

from __future__ import annotations

from ._deep import run_deep
from .syntax import (
    IOTA,
    And,
    Apply,
    Atom,
    Bot,
    ComprehensionSymbol,
    Exists,
    Forall,
    Implies,
    Or,
    Top,
    Var,
)

_INFIX = {"plus": ("+", 1), "times": ("*", 2)}


def _numeral_value(t) -> int | None:
    n = 0
    while isinstance(t, Apply) and t.symbol.name == "S" and len(t.args) == 1:
        n += 1
        t = t.args[0]
    if isinstance(t, Apply) and t.symbol.name == "0" and not t.args:
        return n
    return None


def show_term(t, compact: bool = False) -> str:
    """Render a term; ``compact`` prints closed numerals as decimal literals."""
    return _render(_term, t, compact)


def _render(fn, x, compact) -> str:
    # Pieces go into one list so deep values print in linear time.
    out: list[str] = []
    run_deep(fn, x, 0, compact, out)
    return "".join(out)


def _sep(items, fn, compact, out, sep=", "):
    for i, a in enumerate(items):
        if i:
            out.append(sep)
        fn(a, 0, compact, out)


def _term(t, prec: int, compact: bool, out: list):
    if isinstance(t, Var):
        out.append(t.name)
        return
    sym = t.symbol
    if isinstance(sym, ComprehensionSymbol):
        _class_app(sym, t.args, compact, out)
        return
    if compact:
        n = _numeral_value(t)
        if n is not None and n > 0:
            out.append(str(n))
            return
    if sym.name in _INFIX and len(t.args) == 2:
        op, p = _INFIX[sym.name]
        if prec > p:
            out.append("(")
        _term(t.args[0], p, compact, out)
        out.append(f" {op} ")
        _term(t.args[1], p + 1, compact, out)
        if prec > p:
            out.append(")")
        return
    out.append(sym.name)
    if t.args:
        out.append("(")
        _sep(t.args, _term, compact, out)
        out.append(")")


def _binder(v: Var) -> str:
    return v.name if v.sort == IOTA else f"{v.name}:{v.sort}"


def show_class(c: ComprehensionSymbol, compact: bool = False) -> str:
    return _render(lambda x, _p, cp, out: _class(x, cp, out), c, compact)


def _class(c: ComprehensionSymbol, compact: bool, out: list):
    bound = " ".join(_binder(v) for v in c.bound)
    params = " ".join(_binder(v) for v in c.params)
    params = f" {params} " if params else " "
    out.append(f"{{{bound} |{params}| ")
    _prop(c.body, 0, compact, out)
    out.append("}")


def _class_app(c: ComprehensionSymbol, args, compact, out):
    _class(c, compact, out)
    if tuple(args) != tuple(c.params):
        out.append("(")
        _sep(args, _term, compact, out)
        out.append(")")


# Precedence: quantifiers 0, => 1, \/ 2, /\ 3, atoms 4.
_BIN = {Implies: ("=>", 1), Or: ("\\/", 2), And: ("/\\", 3)}


def show_prop(p, compact: bool = False) -> str:
    return _render(_prop, p, compact)


def _prop(p, prec: int, compact: bool, out: list):
    if isinstance(p, Atom):
        if p.pred.name == "=" and len(p.args) == 2:
            _term(p.args[0], 0, compact, out)
            out.append(" = ")
            _term(p.args[1], 0, compact, out)
            return
        out.append(p.pred.name)
        if p.args:
            out.append("(")
            _sep(p.args, _term, compact, out)
            out.append(")")
        return
    if isinstance(p, Top):
        out.append("top")
        return
    if isinstance(p, Bot):
        out.append("bot")
        return
    if isinstance(p, (Forall, Exists)):
        q = "forall" if isinstance(p, Forall) else "exists"
        if prec > 0:
            out.append("(")
        out.append(f"{q} {p.var.name}:{p.var.sort}, ")
        _prop(p.body, 0, compact, out)
        if prec > 0:
            out.append(")")
        return
    op, q = _BIN[type(p)]
    lp, rp = (q + 1, q) if isinstance(p, Implies) else (q, q + 1)
    if prec > q:
        out.append("(")
    _prop(p.left, lp, compact, out)
    out.append(f" {op} ")
    _prop(p.right, rp, compact, out)
    if prec > q:
        out.append(")")


# ---------------------------------------------------------------------------
# Proof terms

KEYWORDS = frozenset(
    "ax I efq fst snd inl inr case fun pack unpack forall exists top bot "
    "proof rule eq sort pred prelude flag orient".split()
)


def show_proof(p, compact: bool = False) -> str:
    """Render a proof term.  Output can be exponentially large for shared DAGs."""
    return _render(_proof, p, compact)


def _proof(p, prec: int, compact: bool, out: list):
    from . import proofterm as P

    w = out.append

    def sub(q, level):
        _proof(q, level, compact, out)

    def term(t):
        _term(t, 0, compact, out)

    def prop(a, level=0):
        _prop(a, level, compact, out)

    if isinstance(p, P.ProofVar):
        w(f"ax {p.name}" if p.name in KEYWORDS else p.name)
    elif isinstance(p, P.TopIntro):
        w("I")
    elif isinstance(p, P.BotElim):
        w("efq(")
        sub(p.proof, 0)
        if p.target is not None:
            w(" : ")
            prop(p.target)
        w(")")
    elif isinstance(p, P.Pair):
        w("<")
        sub(p.left, 0)
        w(", ")
        sub(p.right, 0)
        w(">")
    elif isinstance(p, P.Case):
        w("case(")
        sub(p.scrutinee, 0)
        w(f"; {p.left_var}. ")
        sub(p.left, 0)
        w(f"; {p.right_var}. ")
        sub(p.right, 0)
        w(")")
    elif isinstance(p, P.Pack):
        if p.ann is not None:
            w("(")
        w("pack(")
        term(p.witness)
        w(", ")
        sub(p.proof, 0)
        w(")")
        if p.ann is not None:
            w(" : ")
            prop(p.ann)
            w(")")
    elif isinstance(p, P.Unpack):
        v = p.term_var
        w("unpack(")
        sub(p.proof, 0)
        w(f"; {v.name} : {v.sort} {p.proof_var}. ")
        sub(p.body, 0)
        w(")")
    elif isinstance(p, (P.Inl, P.Inr)):
        tag = "inl" if isinstance(p, P.Inl) else "inr"
        paren = p.ann is not None or prec > 2
        if paren:
            w("(")
        w(f"{tag} ")
        sub(p.proof, 3)
        if p.ann is not None:
            w(" : ")
            prop(p.ann)
        if paren:
            w(")")
    elif isinstance(p, (P.Fst, P.Snd)):
        tag = "fst" if isinstance(p, P.Fst) else "snd"
        if prec > 2:
            w("(")
        w(f"{tag} ")
        sub(p.proof, 3)
        if prec > 2:
            w(")")
    elif isinstance(p, (P.App, P.TApp)):
        if prec > 1:
            w("(")
        if isinstance(p, P.App):
            sub(p.fn, 1)
            w(" @ ")
            sub(p.arg, 2)
        else:
            sub(p.proof, 1)
            w(" @! ")
            term(p.term)
        if prec > 1:
            w(")")
    elif isinstance(p, (P.ImpIntro, P.AllIntro)):
        if prec > 0:
            w("(")
        if isinstance(p, P.ImpIntro):
            w(f"fun {p.var}")
            if p.domain is not None:
                w(" : ")
                prop(p.domain, 2)
        else:
            w(f"fun! {p.var.name} : {p.var.sort}")
        w(" => ")
        sub(p.body, 0)
        if prec > 0:
            w(")")
    else:
        raise TypeError(f"not a proof term: {p!r}")
