"""Arithmetic as a rewrite system: signature, rules, numerals and Parigot numerals."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import proofterm as P
from .rewrite import (
    PropRule,
    RewriteSystem,
    TermRule,
    class_rule,
    predicativity_violation,
)
from .syntax import (
    BOT,
    IOTA,
    KAPPA,
    TOP,
    Apply,
    Atom,
    ComprehensionSymbol,
    Exists,
    Forall,
    FunctionSymbol,
    Implies,
    PredicateSymbol,
    Prop,
    Signature,
    Term,
    Var,
    implies,
    kappa,
)

ZERO = FunctionSymbol("0", (), IOTA)
SUCC = FunctionSymbol("S", (IOTA,), IOTA)
PLUS = FunctionSymbol("plus", (IOTA, IOTA), IOTA)
TIMES = FunctionSymbol("times", (IOTA, IOTA), IOTA)
PRED = FunctionSymbol("Pred", (IOTA,), IOTA)

EQ = PredicateSymbol("=", (IOTA, IOTA))
NAT = PredicateSymbol("N", (IOTA,))
NULL = PredicateSymbol("Null", (IOTA,))
EPS = PredicateSymbol("eps", (IOTA, KAPPA))


def eps_n(n: int) -> PredicateSymbol:
    """Membership in n-ary classes; ``eps_n(1)`` is plain ``eps``."""
    return EPS if n == 1 else PredicateSymbol(f"eps_{n}", (IOTA,) * n + (kappa(n),))


class PredicativityViolation(Exception):
    pass


def zero() -> Term:
    return Apply(ZERO)


def succ(t: Term) -> Term:
    return Apply(SUCC, (t,))


def plus(a: Term, b: Term) -> Term:
    return Apply(PLUS, (a, b))


def times(a: Term, b: Term) -> Term:
    return Apply(TIMES, (a, b))


def eq(a: Term, b: Term) -> Atom:
    return Atom(EQ, (a, b))


def nat(t: Term) -> Atom:
    return Atom(NAT, (t,))


def eps(t: Term, c: Term) -> Atom:
    return Atom(EPS, (t, c))


_NUMERALS = [Apply(ZERO)]


def numeral(n: int) -> Term:
    """``S^n(0)``; shared, so repeated calls are cheap."""
    if n < 0:
        raise ValueError("numerals are non-negative")
    while len(_NUMERALS) <= n:
        _NUMERALS.append(succ(_NUMERALS[-1]))
    return _NUMERALS[n]


def numeral_value(t: Term) -> int | None:
    """Inverse of :func:`numeral`; None for anything else."""
    n = 0
    while isinstance(t, Apply) and t.symbol == SUCC:
        n += 1
        t = t.args[0]
    return n if isinstance(t, Apply) and t.symbol == ZERO else None


# ---------------------------------------------------------------------------
# The theory

_x, _y, _z, _n = (Var(v) for v in "xyzn")
_X = Var("X", KAPPA)


def nat_unfolding(n: Term) -> Prop:
    """Right-hand side of the ``N`` rule at ``n``."""
    y = _y if _y not in n.free_vars else Var("y'")
    X = _X if _X not in n.free_vars else Var("X'", KAPPA)
    step = Forall(y, implies(nat(y), eps(y, X), eps(succ(y), X)))
    return Forall(X, implies(eps(zero(), X), step, eps(n, X)))


@dataclass(frozen=True)
class ComprehensionSchema:
    """Stands for the infinite family of comprehension rules in ``ha1``."""

    max_arity: int = 4

    def __str__(self):
        return "eps_n(x1..xn, {x1..xn | y1..yp | A}(y1..yp)) --> A"


@dataclass(frozen=True, eq=False)
class HATheory:
    signature: Signature
    ha1: tuple
    ha2: tuple[TermRule, ...]
    impredicative: bool = False

    @property
    def prop_rules(self) -> tuple[PropRule, ...]:
        return tuple(r for r in self.ha1 if isinstance(r, PropRule))

    @cached_property
    def system(self) -> RewriteSystem:
        return RewriteSystem(
            term_rules=self.ha2,
            prop_rules=self.prop_rules,
            comprehension=True,
            impredicative=self.impredicative,
            signature=self.signature,
        )

    def comprehension_rule(self, c: ComprehensionSymbol) -> PropRule:
        return comprehension_rule(c, self.impredicative)


def ha_signature(max_arity: int = 4) -> Signature:
    sig = Signature.empty()
    sig.add_sort(IOTA)
    sig.add_sort(KAPPA)
    for f in (ZERO, SUCC, PLUS, TIMES, PRED):
        sig.add_function(f)
    for p in (EQ, NAT, NULL):
        sig.add_predicate(p)
    for n in range(1, max_arity + 1):
        sig.add_predicate(eps_n(n))
    return sig


def build_HA(impredicative: bool = False, max_arity: int = 4) -> HATheory:
    """Five proposition rules (the comprehension schema counted once) and six term rules."""
    ha1 = (
        ComprehensionSchema(max_arity),
        PropRule(eq(_y, _z), Forall(_X, Implies(eps(_y, _X), eps(_z, _X))), "leibniz"),
        PropRule(nat(_n), nat_unfolding(_n), "nat"),
        PropRule(Atom(NULL, (zero(),)), TOP, "null0"),
        PropRule(Atom(NULL, (succ(_x),)), BOT, "nullS"),
    )
    ha2 = (
        TermRule(Apply(PRED, (zero(),)), zero(), "pred0"),
        TermRule(Apply(PRED, (succ(_x),)), _x, "predS"),
        TermRule(plus(zero(), _y), _y, "plus0"),
        TermRule(plus(succ(_x), _y), succ(plus(_x, _y)), "plusS"),
        TermRule(times(zero(), _y), zero(), "times0"),
        TermRule(times(succ(_x), _y), plus(times(_x, _y), _y), "timesS"),
    )
    return HATheory(ha_signature(max_arity), ha1, ha2, impredicative)


def comprehension_rule(c: ComprehensionSymbol, impredicative: bool = False) -> PropRule:
    """``eps_n(x1..xn, C(y1..yp)) --> A`` for the class symbol ``c``."""
    if not impredicative:
        why = predicativity_violation(c)
        if why is not None:
            raise PredicativityViolation(why)
    return class_rule(c, eps_n(len(c.bound)))


def program_shape(n: int, body: Prop | None = None, prefix: str = "x") -> Prop:
    """``forall x1, N(x1) => ... forall xn, N(xn) => body``; body defaults to ``exists y, N(y)``."""
    if body is None:
        body = Exists(_y, nat(_y))
    out = body
    for i in range(n, 0, -1):
        x = Var(f"{prefix}{i}")
        out = Forall(x, Implies(nat(x), out))
    return out


# ---------------------------------------------------------------------------
# Parigot numerals

_A, _B = "a", "b"
_PARIGOT: list = []
_BODIES: list = []


def parigot(n: int) -> P.ProofTerm:
    """The normal closed proof of ``N(n)``.

    The defining clause for ``n+1`` contains the redex ``rho_n X a b``;
    this returns its normal form ``fun! X => fun a => fun b => b @! n @ rho_n @ body_n``
    where ``body_0 = a`` and ``body_{k+1} = b @! k @ rho_k @ body_k``.
    Results are shared DAGs.
    """
    if n < 0:
        raise ValueError("numerals are non-negative")
    a, b = P.ProofVar(_A), P.ProofVar(_B)
    if not _BODIES:
        _BODIES.append(a)
        _PARIGOT.append(P.AllIntro(_X, P.ImpIntro(_A, None, P.ImpIntro(_B, None, a))))
    while len(_PARIGOT) <= n:
        k = len(_PARIGOT) - 1
        body = P.App(P.App(P.TApp(b, numeral(k)), _PARIGOT[k]), _BODIES[k])
        _BODIES.append(body)
        _PARIGOT.append(P.AllIntro(_X, P.ImpIntro(_A, None, P.ImpIntro(_B, None, body))))
    return _PARIGOT[n]


def parigot_literal(n: int) -> P.ProofTerm:
    """The numeral exactly as the two defining clauses build it (not normal for n >= 1)."""
    a, b = P.ProofVar(_A), P.ProofVar(_B)
    rho = P.AllIntro(_X, P.ImpIntro(_A, None, P.ImpIntro(_B, None, a)))
    for k in range(n):
        inner = P.App(P.App(P.TApp(rho, _X), a), b)
        body = P.App(P.App(P.TApp(b, numeral(k)), rho), inner)
        rho = P.AllIntro(_X, P.ImpIntro(_A, None, P.ImpIntro(_B, None, body)))
    return rho


class NotANumeral(ValueError):
    pass


def decode_numeral(p: P.ProofTerm) -> int:
    """``n`` such that ``p`` is alpha-equal to ``parigot(n)``; single structural pass."""
    return _Decoder().numeral(p, ())


class _Decoder:
    def __init__(self):
        self.memo: dict = {}

    def numeral(self, p, where) -> int:
        hit = self.memo.get(id(p))
        if hit is not None:
            return hit[1]
        n = self._numeral(p, where)
        self.memo[id(p)] = (p, n)
        return n

    def _fail(self, where, why):
        loc = ".".join(where) or "root"
        raise NotANumeral(f"at {loc}: {why}")

    def _numeral(self, p, where) -> int:
        if not (isinstance(p, P.AllIntro) and p.var.sort == KAPPA):
            self._fail(where, "expected fun! X : kappa")
        lam_a = p.body
        if not (isinstance(lam_a, P.ImpIntro) and lam_a.domain is None):
            self._fail(where + ("body",), "expected an unannotated fun")
        lam_b = lam_a.body
        if not (isinstance(lam_b, P.ImpIntro) and lam_b.domain is None):
            self._fail(where + ("body", "body"), "expected an unannotated fun")
        if lam_a.var == lam_b.var:
            self._fail(where, "binders of the two hypotheses coincide")
        return self._body(lam_b.body, lam_a.var, lam_b.var, where + ("body", "body", "body"))

    def _body(self, q, a, b, where) -> int:
        key = (id(q), a, b)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[1]
        n = self._body_go(q, a, b, where)
        self.memo[key] = (q, n)
        return n

    def _body_go(self, q, a, b, where) -> int:
        if isinstance(q, P.ProofVar):
            if q.name == a:
                return 0
            self._fail(where, f"expected the base hypothesis {a}, found {q.name}")
        if not (isinstance(q, P.App) and isinstance(q.fn, P.App)):
            self._fail(where, "expected b @! k @ rho_k @ body")
        step = q.fn.fn
        if not (
            isinstance(step, P.TApp)
            and isinstance(step.proof, P.ProofVar)
            and step.proof.name == b
        ):
            self._fail(where + ("fn", "fn"), f"expected {b} @! k")
        k = numeral_value(step.term)
        if k is None:
            self._fail(where + ("fn", "fn", "term"), f"{step.term} is not a numeral")
        if self.numeral(q.fn.arg, where + ("fn", "arg")) != k:
            self._fail(where + ("fn", "arg"), f"expected rho_{k}")
        if self._body(q.arg, a, b, where + ("arg",)) != k:
            self._fail(where + ("arg",), f"expected the unfolded body of rho_{k}")
        return k + 1
