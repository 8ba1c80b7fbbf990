"""Bidirectional checking of proof terms modulo a rewrite system.

Introductions, ``efq``, ``case`` and ``unpack`` are checked against a
target whose head is exposed by rewriting; eliminations synthesize.
Every congruence side condition is sent to
:func:`~dedmod.rewrite.decide_congruence`, and an undecided answer is
reported as such rather than guessed.

Term binders in the proof (``fun!`` and ``unpack``) are mapped to fresh
variables on entry, so the eigenvariable conditions hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from . import proofterm as P
from ._deep import run_deep
from .arith import program_shape
from .rewrite import (
    Distinct,
    Equivalent,
    Exposed,
    Limits,
    RewriteSystem,
    StillAtomic,
    decide_congruence,
    head_expose,
)
from .syntax import (
    BOT,
    TOP,
    And,
    Exists,
    Forall,
    Implies,
    Or,
    Prop,
    Sort,
    SortError,
    Term,
    Var,
    apply_subst,
    canonical,
    fresh_name,
    head_name,
)

Path = tuple[str, ...]


@dataclass(frozen=True)
class Context:
    """Ordered declarations: ``(name, Sort)`` for terms, ``(name, Prop)`` for proofs."""

    entries: tuple = ()

    def __post_init__(self):
        names = [n for n, _ in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("context names must be unique")

    def with_term(self, name: str, sort: Sort) -> Context:
        return Context(self.entries + ((name, sort),))

    def with_proof(self, name: str, prop: Prop) -> Context:
        return Context(self.entries + ((name, prop),))

    @classmethod
    def of(cls, proofs: Mapping[str, Prop] | None = None, terms: Mapping[str, Sort] | None = None):
        entries = tuple((terms or {}).items()) + tuple((proofs or {}).items())
        return cls(entries)

    @property
    def proofs(self) -> dict[str, Prop]:
        return {n: a for n, a in self.entries if isinstance(a, Prop)}

    @property
    def terms(self) -> dict[str, Sort]:
        return {n: s for n, s in self.entries if isinstance(s, Sort)}


@dataclass(frozen=True)
class Valid:
    ok = True


@dataclass(frozen=True)
class Invalid:
    path: Path
    reason: str
    ok = False


@dataclass(frozen=True)
class Undecided:
    path: Path
    pair: tuple
    reason: str = ""
    ok = False


CheckResult = Union[Valid, Invalid, Undecided]


class _Stop(Exception):
    def __init__(self, result):
        super().__init__(result)
        self.result = result


_NAMES = {And: "a conjunction", Or: "a disjunction", Implies: "an implication",
          Forall: "a universal", Exists: "an existential"}


@dataclass
class _Env:
    hyps: dict  # proof variable -> Prop
    scope: dict  # term variable name -> Var
    ren: dict = field(default_factory=dict)  # proof binder Var -> fresh Var

    def with_hyp(self, name, prop):
        h = dict(self.hyps)
        h[name] = prop
        return _Env(h, self.scope, self.ren)

    def with_term(self, binder: Var, fresh: Var):
        s = dict(self.scope)
        s[fresh.name] = fresh
        r = dict(self.ren)
        r[binder] = fresh
        return _Env(self.hyps, s, r)


class _Checker:
    def __init__(self, R: RewriteSystem, lim: Limits):
        self.R = R
        self.lim = lim
        self.closed_ok: dict = {}  # (id, target key) -> proof, pinned so ids stay valid

    # errors --------------------------------------------------------------

    def fail(self, path, reason):
        raise _Stop(Invalid(path, reason))

    def undecided(self, path, a, b, reason):
        raise _Stop(Undecided(path, (a, b), reason))

    # helpers -------------------------------------------------------------

    def fresh(self, env: _Env, v: Var) -> Var:
        name = v.name
        if name in env.scope:
            name = fresh_name(name, env.scope.keys())
        return Var(name, v.sort)

    def read(self, env: _Env, x, path):
        """A term or proposition from the proof, under the current renaming."""
        if x is None:
            return None
        y = apply_subst(env.ren, x) if env.ren else x
        for v in y.free_vars:
            if env.scope.get(v.name) != v:
                self.fail(path, f"unbound variable {v.name}")
        return y

    def conv(self, a: Prop, b: Prop, path):
        v = decide_congruence(self.R, a, b, self.lim)
        if isinstance(v, Equivalent):
            return
        if isinstance(v, Distinct):
            self.fail(path, f"congruence Distinct: {a} is not congruent to {b}")
        self.undecided(path, a, b, v.reason)

    def expose(self, a: Prop, want, path) -> Prop:
        r = head_expose(self.R, a, self.lim)
        if isinstance(r, Exposed):
            e = r.value
        elif isinstance(r, StillAtomic):
            if self.R.unoriented:
                self.undecided(path, a, None, "cannot expose the head of an atom")
            e = r.value
        else:
            self.undecided(path, a, None, "fuel exhausted while exposing a head")
        if want is not None and not isinstance(e, want):
            if self.R.unoriented:
                self.undecided(path, a, None, f"head {head_name(e)} under unoriented equations")
            self.fail(path, f"head mismatch: expected {_NAMES[want]}, found {e}")
        return e

    def instantiate(self, q, t: Term, path):
        if q.var.sort != t.sort:
            self.fail(path, f"sort mismatch: {t} has sort {t.sort}, expected {q.var.sort}")
        return apply_subst({q.var: t}, q.body)

    # checking ------------------------------------------------------------

    def check(self, env: _Env, p, b: Prop, path: Path):
        closed = not p.free_proof_vars and not p.free_term_vars
        if closed:
            key = (id(p), canonical(b))
            if key in self.closed_ok:
                return
        self._check(env, p, b, path)
        if closed:
            self.closed_ok[key] = p

    def _check(self, env: _Env, p, b: Prop, path: Path):
        if isinstance(p, P.TopIntro):
            self.conv(b, TOP, path)
        elif isinstance(p, P.Pair):
            e = self.expose(b, And, path)
            self.check(env, p.left, e.left, path + ("left",))
            self.check(env, p.right, e.right, path + ("right",))
        elif isinstance(p, (P.Inl, P.Inr)):
            if p.ann is not None:
                self.conv(self.read(env, p.ann, path + ("ann",)), b, path)
            e = self.expose(b, Or, path)
            side = e.left if isinstance(p, P.Inl) else e.right
            self.check(env, p.proof, side, path + ("proof",))
        elif isinstance(p, P.ImpIntro):
            e = self.expose(b, Implies, path)
            hyp = e.left
            if p.domain is not None:
                hyp = self.read(env, p.domain, path + ("domain",))
                self.conv(hyp, e.left, path + ("domain",))
            self.check(env.with_hyp(p.var, hyp), p.body, e.right, path + ("body",))
        elif isinstance(p, P.AllIntro):
            e = self.expose(b, Forall, path)
            if e.var.sort != p.var.sort:
                self.fail(path, f"sort mismatch: binder {p.var.name} has sort {p.var.sort}, "
                                f"expected {e.var.sort}")
            z = self.fresh(env, p.var)
            self.check(env.with_term(p.var, z), p.body, apply_subst({e.var: z}, e.body),
                       path + ("body",))
        elif isinstance(p, P.Pack):
            if p.ann is not None:
                self.conv(self.read(env, p.ann, path + ("ann",)), b, path)
            e = self.expose(b, Exists, path)
            t = self.read(env, p.witness, path + ("witness",))
            self.check(env, p.proof, self.instantiate(e, t, path + ("witness",)),
                       path + ("proof",))
        elif isinstance(p, P.BotElim):
            if p.target is not None:
                self.conv(self.read(env, p.target, path + ("target",)), b, path)
            self.check(env, p.proof, BOT, path + ("proof",))
        elif isinstance(p, P.Case):
            a = self.synth(env, p.scrutinee, path + ("scrutinee",))
            e = self.expose(a, Or, path + ("scrutinee",))
            self.check(env.with_hyp(p.left_var, e.left), p.left, b, path + ("left",))
            self.check(env.with_hyp(p.right_var, e.right), p.right, b, path + ("right",))
        elif isinstance(p, P.Unpack):
            a = self.synth(env, p.proof, path + ("proof",))
            e = self.expose(a, Exists, path + ("proof",))
            z = self.fresh(env, p.term_var)
            if z.sort != e.var.sort:
                self.fail(path, f"sort mismatch: binder {p.term_var.name} has sort "
                                f"{p.term_var.sort}, expected {e.var.sort}")
            inner = env.with_term(p.term_var, z).with_hyp(p.proof_var,
                                                          apply_subst({e.var: z}, e.body))
            self.check(inner, p.body, b, path + ("body",))
        elif (
            isinstance(p, P.App)
            and isinstance(p.fn, P.ImpIntro)
            and p.fn.domain is not None
        ):
            # (fun a : A => q) @ r  is checked as  r : A  and  q : B under a : A
            dom = self.read(env, p.fn.domain, path + ("fn", "domain"))
            self.check(env, p.arg, dom, path + ("arg",))
            self.check(env.with_hyp(p.fn.var, dom), p.fn.body, b, path + ("fn", "body"))
        else:
            a = self.synth(env, p, path)
            self.conv(a, b, path)

    # synthesis -----------------------------------------------------------

    def synth(self, env: _Env, p, path: Path) -> Prop:
        if isinstance(p, P.ProofVar):
            a = env.hyps.get(p.name)
            if a is None:
                self.fail(path, f"unbound variable {p.name}")
            return a
        if isinstance(p, (P.Fst, P.Snd)):
            a = self.synth(env, p.proof, path + ("proof",))
            e = self.expose(a, And, path + ("proof",))
            return e.left if isinstance(p, P.Fst) else e.right
        if isinstance(p, P.App):
            a = self.synth(env, p.fn, path + ("fn",))
            e = self.expose(a, Implies, path + ("fn",))
            self.check(env, p.arg, e.left, path + ("arg",))
            return e.right
        if isinstance(p, P.TApp):
            a = self.synth(env, p.proof, path + ("proof",))
            e = self.expose(a, Forall, path + ("proof",))
            t = self.read(env, p.term, path + ("term",))
            return self.instantiate(e, t, path + ("term",))
        if isinstance(p, P.TopIntro):
            return TOP
        if isinstance(p, P.Pair):
            return And(self.synth(env, p.left, path + ("left",)),
                       self.synth(env, p.right, path + ("right",)))
        if isinstance(p, P.ImpIntro) and p.domain is not None:
            dom = self.read(env, p.domain, path + ("domain",))
            return Implies(dom, self.synth(env.with_hyp(p.var, dom), p.body, path + ("body",)))
        if isinstance(p, P.AllIntro):
            z = self.fresh(env, p.var)
            return Forall(z, self.synth(env.with_term(p.var, z), p.body, path + ("body",)))
        if isinstance(p, (P.Inl, P.Inr, P.Pack)) and p.ann is not None:
            a = self.read(env, p.ann, path + ("ann",))
            self.check(env, p, a, path)
            return a
        if isinstance(p, P.BotElim) and p.target is not None:
            a = self.read(env, p.target, path + ("target",))
            self.check(env, p.proof, BOT, path + ("proof",))
            return a
        if isinstance(p, P.Case):
            a = self.synth(env, p.scrutinee, path + ("scrutinee",))
            e = self.expose(a, Or, path + ("scrutinee",))
            c = self.synth(env.with_hyp(p.left_var, e.left), p.left, path + ("left",))
            self.check(env.with_hyp(p.right_var, e.right), p.right, c, path + ("right",))
            return c
        if isinstance(p, P.Unpack):
            a = self.synth(env, p.proof, path + ("proof",))
            e = self.expose(a, Exists, path + ("proof",))
            z = self.fresh(env, p.term_var)
            inner = env.with_term(p.term_var, z).with_hyp(p.proof_var,
                                                          apply_subst({e.var: z}, e.body))
            c = self.synth(inner, p.body, path + ("body",))
            if z in c.free_vars:
                self.fail(path, f"freshness violation: witness variable {p.term_var.name} "
                                "escapes into the conclusion")
            return c
        self.fail(path, f"annotation required to synthesize a type for {type(p).__name__}")


def _env(ctx: Context, extra_free=()) -> _Env:
    scope = {}
    for name, s in ctx.terms.items():
        scope[name] = Var(name, s)
    hyps = ctx.proofs
    for a in list(hyps.values()) + list(extra_free):
        for v in a.free_vars:
            scope.setdefault(v.name, v)
    return _Env(dict(hyps), scope)


def check(
    R: RewriteSystem,
    ctx: Context,
    proof: P.ProofTerm,
    target: Prop,
    lim: Limits = Limits(),
) -> CheckResult:
    """Valid, Invalid(path, reason) or Undecided(path, pair, reason)."""
    ck = _Checker(R, lim)

    def go():
        ck.check(_env(ctx, (target,)), proof, target, ())
        return Valid()

    try:
        return run_deep(go)
    except _Stop as s:
        return s.result
    except SortError as e:
        return Invalid((), f"sort error: {e}")


def synthesize(
    R: RewriteSystem,
    ctx: Context,
    proof: P.ProofTerm,
    lim: Limits = Limits(),
) -> Union[Prop, Invalid, Undecided]:
    """The proposition a neutral or annotated proof proves, or the failure."""
    ck = _Checker(R, lim)
    try:
        return run_deep(ck.synth, _env(ctx), proof, ())
    except _Stop as s:
        return s.result
    except SortError as e:
        return Invalid((), f"sort error: {e}")


@dataclass(frozen=True)
class ShapeOk:
    ok = True


@dataclass(frozen=True)
class ShapeMismatch:
    result: CheckResult
    ok = False


def check_closed_program_shape(
    R: RewriteSystem,
    proof: P.ProofTerm,
    arity: int,
    body: Optional[Prop] = None,
    lim: Limits = Limits(),
    ctx: Context = Context(),
):
    """Check ``proof`` against ``forall x1, N(x1) => ... => exists y, N(y)``."""
    res = check(R, ctx, proof, program_shape(arity, body), lim)
    return ShapeOk() if isinstance(res, Valid) else ShapeMismatch(res)
