"""Proof terms, substitution and cut elimination.

Proof terms are immutable and may be shared as DAGs (Parigot numerals
are exponentially large as trees).  Equality of proofs is identity;
structural comparison goes through :func:`alpha_eq`.  Annotations are
carried along but never affect reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Optional

from ._deep import run_deep
from .results import Fuel, FuelExhausted, Normal, OutOfFuel
from .syntax import IOTA, Prop, Term, Var, _canon, apply_subst, fresh_name

_EMPTY = frozenset()


class ProofTerm:
    """Base class.  Subclasses define ``_kids`` (sub-proofs in left-to-right order)."""

    __slots__ = ()

    def __str__(self):
        from .printer import show_proof

        return show_proof(self)

    def __repr__(self):
        return f"{type(self).__name__}<{self}>"

    @cached_property
    def is_normal(self) -> bool:
        return not _is_redex(self) and all(k.is_normal for k in self._kids)

    @cached_property
    def size(self) -> int:
        """Tree size (shared nodes counted once per occurrence)."""
        return 1 + sum(k.size for k in self._kids)


def _union(*sets):
    out = _EMPTY
    for s in sets:
        if s:
            out = out | s if out else s
    return out


@dataclass(frozen=True, eq=False, repr=False)
class ProofVar(ProofTerm):
    name: str

    _kids = ()

    @cached_property
    def free_proof_vars(self):
        return frozenset((self.name,))

    free_term_vars = _EMPTY


@dataclass(frozen=True, eq=False, repr=False)
class TopIntro(ProofTerm):
    _kids = ()
    free_proof_vars = _EMPTY
    free_term_vars = _EMPTY


@dataclass(frozen=True, eq=False, repr=False)
class BotElim(ProofTerm):
    proof: ProofTerm
    target: Optional[Prop] = None

    @property
    def _kids(self):
        return (self.proof,)

    @cached_property
    def free_proof_vars(self):
        return self.proof.free_proof_vars

    @cached_property
    def free_term_vars(self):
        return _union(self.proof.free_term_vars, self.target.free_vars if self.target else None)


@dataclass(frozen=True, eq=False, repr=False)
class Pair(ProofTerm):
    left: ProofTerm
    right: ProofTerm

    @property
    def _kids(self):
        return (self.left, self.right)

    @cached_property
    def free_proof_vars(self):
        return _union(self.left.free_proof_vars, self.right.free_proof_vars)

    @cached_property
    def free_term_vars(self):
        return _union(self.left.free_term_vars, self.right.free_term_vars)


@dataclass(frozen=True, eq=False, repr=False)
class _Unary(ProofTerm):
    proof: ProofTerm

    @property
    def _kids(self):
        return (self.proof,)

    @cached_property
    def free_proof_vars(self):
        return self.proof.free_proof_vars

    @cached_property
    def free_term_vars(self):
        return self.proof.free_term_vars


class Fst(_Unary):
    pass


class Snd(_Unary):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class _Injection(ProofTerm):
    proof: ProofTerm
    ann: Optional[Prop] = None

    @property
    def _kids(self):
        return (self.proof,)

    @cached_property
    def free_proof_vars(self):
        return self.proof.free_proof_vars

    @cached_property
    def free_term_vars(self):
        return _union(self.proof.free_term_vars, self.ann.free_vars if self.ann else None)


class Inl(_Injection):
    pass


class Inr(_Injection):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Case(ProofTerm):
    scrutinee: ProofTerm
    left_var: str
    left: ProofTerm
    right_var: str
    right: ProofTerm

    @property
    def _kids(self):
        return (self.scrutinee, self.left, self.right)

    @cached_property
    def free_proof_vars(self):
        return _union(
            self.scrutinee.free_proof_vars,
            self.left.free_proof_vars - {self.left_var},
            self.right.free_proof_vars - {self.right_var},
        )

    @cached_property
    def free_term_vars(self):
        return _union(
            self.scrutinee.free_term_vars, self.left.free_term_vars, self.right.free_term_vars
        )


@dataclass(frozen=True, eq=False, repr=False)
class ImpIntro(ProofTerm):
    var: str
    domain: Optional[Prop]
    body: ProofTerm

    @property
    def _kids(self):
        return (self.body,)

    @cached_property
    def free_proof_vars(self):
        return self.body.free_proof_vars - {self.var}

    @cached_property
    def free_term_vars(self):
        return _union(self.body.free_term_vars, self.domain.free_vars if self.domain else None)


@dataclass(frozen=True, eq=False, repr=False)
class App(ProofTerm):
    fn: ProofTerm
    arg: ProofTerm

    @property
    def _kids(self):
        return (self.fn, self.arg)

    @cached_property
    def free_proof_vars(self):
        return _union(self.fn.free_proof_vars, self.arg.free_proof_vars)

    @cached_property
    def free_term_vars(self):
        return _union(self.fn.free_term_vars, self.arg.free_term_vars)


@dataclass(frozen=True, eq=False, repr=False)
class AllIntro(ProofTerm):
    var: Var
    body: ProofTerm

    @property
    def _kids(self):
        return (self.body,)

    @cached_property
    def free_proof_vars(self):
        return self.body.free_proof_vars

    @cached_property
    def free_term_vars(self):
        return self.body.free_term_vars - {self.var}


@dataclass(frozen=True, eq=False, repr=False)
class TApp(ProofTerm):
    proof: ProofTerm
    term: Term

    @property
    def _kids(self):
        return (self.proof,)

    @cached_property
    def free_proof_vars(self):
        return self.proof.free_proof_vars

    @cached_property
    def free_term_vars(self):
        return _union(self.proof.free_term_vars, self.term.free_vars)


@dataclass(frozen=True, eq=False, repr=False)
class Pack(ProofTerm):
    witness: Term
    proof: ProofTerm
    ann: Optional[Prop] = None

    @property
    def _kids(self):
        return (self.proof,)

    @cached_property
    def free_proof_vars(self):
        return self.proof.free_proof_vars

    @cached_property
    def free_term_vars(self):
        return _union(
            self.witness.free_vars,
            self.proof.free_term_vars,
            self.ann.free_vars if self.ann else None,
        )


@dataclass(frozen=True, eq=False, repr=False)
class Unpack(ProofTerm):
    proof: ProofTerm
    term_var: Var
    proof_var: str
    body: ProofTerm

    @property
    def _kids(self):
        return (self.proof, self.body)

    @cached_property
    def free_proof_vars(self):
        return _union(self.proof.free_proof_vars, self.body.free_proof_vars - {self.proof_var})

    @cached_property
    def free_term_vars(self):
        return _union(self.proof.free_term_vars, self.body.free_term_vars - {self.term_var})


INTRODUCTIONS = (TopIntro, Pair, Inl, Inr, ImpIntro, AllIntro, Pack)
NEUTRALS = (ProofVar, BotElim, Fst, Snd, Case, App, TApp, Unpack)
I = TopIntro()


def is_neutral(p: ProofTerm) -> bool:
    """Axioms and eliminations are neutral; introductions are not."""
    return isinstance(p, NEUTRALS)


def is_introduction(p: ProofTerm) -> bool:
    return isinstance(p, INTRODUCTIONS)


def _is_redex(p) -> bool:
    if isinstance(p, (Fst, Snd)):
        return isinstance(p.proof, Pair)
    if isinstance(p, Case):
        return isinstance(p.scrutinee, (Inl, Inr))
    if isinstance(p, App):
        return isinstance(p.fn, ImpIntro)
    if isinstance(p, TApp):
        return isinstance(p.proof, AllIntro)
    if isinstance(p, Unpack):
        return isinstance(p.proof, Pack)
    return False


# ---------------------------------------------------------------------------
# Substitution


def _term_names(ts: Mapping, ps: Mapping) -> set[str]:
    names = set()
    for t in ts.values():
        names.update(v.name for v in t.free_vars)
    for p in ps.values():
        names.update(v.name for v in p.free_term_vars)
    return names


class _Substituter:
    """Simultaneous capture-avoiding substitution, memoized on shared nodes."""

    def __init__(self, ps: Mapping[str, ProofTerm], ts: Mapping[Var, Term]):
        self.ps = ps
        self.ts = ts
        self.memo: dict = {}
        self._pnames = None
        self._tnames = None

    @property
    def proof_names(self):
        if self._pnames is None:
            self._pnames = set().union(*(p.free_proof_vars for p in self.ps.values()))
        return self._pnames

    @property
    def term_names(self):
        if self._tnames is None:
            self._tnames = _term_names(self.ts, self.ps)
        return self._tnames

    def prop(self, a):
        if a is None or not self.ts:
            return a
        return apply_subst(self.ts, a)

    def term(self, t):
        return apply_subst(self.ts, t) if self.ts else t

    def run(self, p: ProofTerm) -> ProofTerm:
        if not (
            (self.ps and not self.ps.keys().isdisjoint(p.free_proof_vars))
            or (self.ts and not self.ts.keys().isdisjoint(p.free_term_vars))
        ):
            return p
        key = id(p)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[1]
        out = self._go(p)
        self.memo[key] = (p, out)
        return out

    def _inner(self, drop_p=(), drop_t=(), ren_p=None, ren_t=None) -> _Substituter:
        ps = {k: v for k, v in self.ps.items() if k not in drop_p}
        ts = {k: v for k, v in self.ts.items() if k not in drop_t}
        if ren_p:
            ps.update(ren_p)
        if ren_t:
            ts.update(ren_t)
        return _Substituter(ps, ts)

    def _bind_proof(self, name: str, body: ProofTerm, extra_avoid=()):
        """Returns (new_name, substituter for the body)."""
        if name in self.proof_names:
            avoid = self.proof_names | body.free_proof_vars | set(self.ps) | set(extra_avoid)
            new = fresh_name(name, avoid)
            return new, self._inner(drop_p=(name,), ren_p={name: ProofVar(new)})
        if name in self.ps:
            return name, self._inner(drop_p=(name,))
        return name, self

    def _go(self, p):
        if isinstance(p, ProofVar):
            return self.ps.get(p.name, p)
        if isinstance(p, BotElim):
            return BotElim(self.run(p.proof), self.prop(p.target))
        if isinstance(p, Pair):
            return Pair(self.run(p.left), self.run(p.right))
        if isinstance(p, _Unary):
            return type(p)(self.run(p.proof))
        if isinstance(p, _Injection):
            return type(p)(self.run(p.proof), self.prop(p.ann))
        if isinstance(p, App):
            return App(self.run(p.fn), self.run(p.arg))
        if isinstance(p, TApp):
            return TApp(self.run(p.proof), self.term(p.term))
        if isinstance(p, Pack):
            return Pack(self.term(p.witness), self.run(p.proof), self.prop(p.ann))
        if isinstance(p, ImpIntro):
            name, sub = self._bind_proof(p.var, p.body)
            return ImpIntro(name, self.prop(p.domain), sub.run(p.body))
        if isinstance(p, Case):
            ln, lsub = self._bind_proof(p.left_var, p.left)
            rn, rsub = self._bind_proof(p.right_var, p.right)
            return Case(self.run(p.scrutinee), ln, lsub.run(p.left), rn, rsub.run(p.right))
        if isinstance(p, AllIntro):
            v, sub = self._bind_term(p.var, p.body)
            return AllIntro(v, sub.run(p.body))
        if isinstance(p, Unpack):
            v, sub = self._bind_term(p.term_var, p.body)
            name, sub2 = sub._bind_proof(p.proof_var, p.body)
            return Unpack(self.run(p.proof), v, name, sub2.run(p.body))
        return p

    def _bind_term(self, v: Var, body: ProofTerm):
        if v.name in self.term_names:
            avoid = (
                self.term_names
                | {w.name for w in body.free_term_vars}
                | {w.name for w in self.ts}
            )
            nv = Var(fresh_name(v.name, avoid), v.sort)
            return nv, self._inner(drop_t=(v,), ren_t={v: nv})
        if v in self.ts:
            return v, self._inner(drop_t=(v,))
        return v, self


def substitute(
    p: ProofTerm,
    proofs: Mapping[str, ProofTerm] | None = None,
    terms: Mapping[Var, Term] | None = None,
) -> ProofTerm:
    """Simultaneous substitution of proof variables and term variables."""
    ts = {v: t for v, t in (terms or {}).items() if v != t}
    for v, t in ts.items():
        if v.sort != t.sort:
            from .syntax import SortError

            raise SortError(f"cannot substitute {t} of sort {t.sort} for {v.name}", t)
    ps = {a: q for a, q in (proofs or {}).items() if not (isinstance(q, ProofVar) and q.name == a)}
    if not ps and not ts:
        return p
    return _Substituter(ps, ts).run(p)


def subst_proof(p: ProofTerm, alpha: str, sigma: ProofTerm) -> ProofTerm:
    return substitute(p, proofs={alpha: sigma})


def subst_term_in_proof(p: ProofTerm, x: Var, t: Term) -> ProofTerm:
    return substitute(p, terms={x: t})


# ---------------------------------------------------------------------------
# Reduction


def contract(p: ProofTerm) -> ProofTerm:
    """Contract the redex at the root of ``p`` (which must be one)."""
    if isinstance(p, Fst):
        return p.proof.left
    if isinstance(p, Snd):
        return p.proof.right
    if isinstance(p, Case):
        s = p.scrutinee
        if isinstance(s, Inl):
            return subst_proof(p.left, p.left_var, s.proof)
        return subst_proof(p.right, p.right_var, s.proof)
    if isinstance(p, App):
        return subst_proof(p.fn.body, p.fn.var, p.arg)
    if isinstance(p, TApp):
        return subst_term_in_proof(p.proof.body, p.proof.var, p.term)
    if isinstance(p, Unpack):
        pk = p.proof
        return substitute(p.body, {p.proof_var: pk.proof}, {p.term_var: pk.witness})
    raise ValueError("not a redex")


def _rebuild(p: ProofTerm, i: int, new: ProofTerm) -> ProofTerm:
    if isinstance(p, BotElim):
        return BotElim(new, p.target)
    if isinstance(p, Pair):
        return Pair(new, p.right) if i == 0 else Pair(p.left, new)
    if isinstance(p, _Unary):
        return type(p)(new)
    if isinstance(p, _Injection):
        return type(p)(new, p.ann)
    if isinstance(p, Case):
        kids = [p.scrutinee, p.left, p.right]
        kids[i] = new
        return Case(kids[0], p.left_var, kids[1], p.right_var, kids[2])
    if isinstance(p, ImpIntro):
        return ImpIntro(p.var, p.domain, new)
    if isinstance(p, App):
        return App(new, p.arg) if i == 0 else App(p.fn, new)
    if isinstance(p, AllIntro):
        return AllIntro(p.var, new)
    if isinstance(p, TApp):
        return TApp(new, p.term)
    if isinstance(p, Pack):
        return Pack(p.witness, new, p.ann)
    if isinstance(p, Unpack):
        return (
            Unpack(new, p.term_var, p.proof_var, p.body)
            if i == 0
            else Unpack(p.proof, p.term_var, p.proof_var, new)
        )
    raise TypeError(p)


def reduce_step(p: ProofTerm) -> Optional[ProofTerm]:
    """Contract the leftmost-outermost redex; None if ``p`` is normal."""
    if p.is_normal:
        return None
    if _is_redex(p):
        return contract(p)
    for i, k in enumerate(p._kids):
        if not k.is_normal:
            return _rebuild(p, i, reduce_step(k))
    return None


def redexes(p: ProofTerm, path=()):
    """Every (path, one-step reduct) pair; used to explore all reduction paths."""
    if p.is_normal:
        return
    if _is_redex(p):
        yield path, contract(p)
    for i, k in enumerate(p._kids):
        for sub, new in redexes(k, path + (i,)):
            yield sub, _rebuild(p, i, new)


def normalize_proof(p: ProofTerm, fuel: int = 10**6):
    """Iterate :func:`reduce_step` at most ``fuel`` times."""
    return run_deep(_normalize_proof, p, fuel)


def _normalize_proof(p, fuel):
    steps = 0
    while True:
        nxt = reduce_step(p)
        if nxt is None:
            return Normal(p, steps)
        if steps >= fuel:
            return FuelExhausted(p, steps)
        p = nxt
        steps += 1


def evaluate(p: ProofTerm, fuel: int = 10**6):
    """Normal form computed with sharing: sub-results are memoized by node.

    Reaches the same normal form as :func:`normalize_proof` on strongly
    normalizing input, in far fewer steps on shared DAGs such as Parigot
    numeral computations.  ``steps`` counts contractions.
    """
    ev = _Evaluator(Fuel(fuel))
    try:
        return Normal(run_deep(ev.nf, p), ev.fuel.used)
    except (OutOfFuel, RecursionError):
        return FuelExhausted(p, ev.fuel.used)


class _Evaluator:
    def __init__(self, fuel: Fuel):
        self.fuel = fuel
        self.memo: dict = {}

    def nf(self, p: ProofTerm) -> ProofTerm:
        if p.is_normal:
            return p
        hit = self.memo.get(id(p))
        if hit is not None:
            return hit[1]
        out = self._go(p)
        self.memo[id(p)] = (p, out)
        return out

    def _beta(self, q: ProofTerm) -> ProofTerm:
        self.fuel.spend()
        return self.nf(q)

    def _go(self, p):
        if isinstance(p, App):
            f, a = self.nf(p.fn), self.nf(p.arg)
            if isinstance(f, ImpIntro):
                return self._beta(subst_proof(f.body, f.var, a))
            return App(f, a)
        if isinstance(p, TApp):
            f = self.nf(p.proof)
            if isinstance(f, AllIntro):
                return self._beta(subst_term_in_proof(f.body, f.var, p.term))
            return TApp(f, p.term)
        if isinstance(p, (Fst, Snd)):
            q = self.nf(p.proof)
            if isinstance(q, Pair):
                self.fuel.spend()
                return q.left if isinstance(p, Fst) else q.right
            return type(p)(q)
        if isinstance(p, Case):
            s = self.nf(p.scrutinee)
            if isinstance(s, Inl):
                return self._beta(subst_proof(p.left, p.left_var, s.proof))
            if isinstance(s, Inr):
                return self._beta(subst_proof(p.right, p.right_var, s.proof))
            return Case(s, p.left_var, self.nf(p.left), p.right_var, self.nf(p.right))
        if isinstance(p, Unpack):
            s = self.nf(p.proof)
            if isinstance(s, Pack):
                return self._beta(
                    substitute(p.body, {p.proof_var: s.proof}, {p.term_var: s.witness})
                )
            return Unpack(s, p.term_var, p.proof_var, self.nf(p.body))
        kids = p._kids
        out = p
        for i, k in enumerate(kids):
            nk = self.nf(k)
            if nk is not k:
                out = _rebuild(out, i, nk)
        return out


def check_uniformity(p: ProofTerm) -> bool:
    """True iff a closed normal proof ends with an introduction.

    Raises ValueError if ``p`` is open or not normal.
    """
    if p.free_proof_vars or p.free_term_vars:
        names = sorted(p.free_proof_vars) + sorted(v.name for v in p.free_term_vars)
        raise ValueError("check_uniformity needs a closed proof; free: " + ", ".join(names))
    if not p.is_normal:
        raise ValueError("check_uniformity needs a normal proof")
    return is_introduction(p)


# ---------------------------------------------------------------------------
# Alpha-equivalence


class _Keyer:
    """Interned nameless keys; closed shared nodes are keyed once."""

    def __init__(self):
        self.table: dict = {}
        self.memo: dict = {}

    def intern(self, k) -> int:
        return self.table.setdefault(k, len(self.table))

    def key(self, p, penv: dict, tenv: dict, depth: int) -> int:
        closed = not p.free_proof_vars and not p.free_term_vars
        if closed:
            hit = self.memo.get(id(p))
            if hit is not None:
                return hit[1]
        k = self.intern(self._shape(p, penv, tenv, depth))
        if closed:
            self.memo[id(p)] = (p, k)
        return k

    def _obj(self, x, tenv, depth):
        if x is None:
            return None
        env = {v: ("t", depth - lvl) for v, lvl in tenv.items()}
        return _canon(x, env, 0)

    def _shape(self, p, penv, tenv, depth):
        k = self.key
        if isinstance(p, ProofVar):
            lvl = penv.get(p.name)
            return ("v", p.name) if lvl is None else ("b", depth - lvl)
        if isinstance(p, TopIntro):
            return ("I",)
        if isinstance(p, ImpIntro):
            inner = {**penv, p.var: depth + 1}
            return (
                "lam",
                self._obj(p.domain, tenv, depth),
                k(p.body, inner, tenv, depth + 1),
            )
        if isinstance(p, AllIntro):
            inner = {**tenv, p.var: depth + 1}
            return ("Lam", p.var.sort.name, k(p.body, penv, inner, depth + 1))
        if isinstance(p, Case):
            lp = {**penv, p.left_var: depth + 1}
            rp = {**penv, p.right_var: depth + 1}
            return (
                "case",
                k(p.scrutinee, penv, tenv, depth),
                k(p.left, lp, tenv, depth + 1),
                k(p.right, rp, tenv, depth + 1),
            )
        if isinstance(p, Unpack):
            inner_t = {**tenv, p.term_var: depth + 1}
            inner_p = {**penv, p.proof_var: depth + 2}
            return (
                "unpack",
                p.term_var.sort.name,
                k(p.proof, penv, tenv, depth),
                k(p.body, inner_p, inner_t, depth + 2),
            )
        if isinstance(p, TApp):
            return ("tapp", k(p.proof, penv, tenv, depth), self._obj(p.term, tenv, depth))
        if isinstance(p, Pack):
            return (
                "pack",
                self._obj(p.witness, tenv, depth),
                k(p.proof, penv, tenv, depth),
                self._obj(p.ann, tenv, depth),
            )
        if isinstance(p, BotElim):
            return ("efq", k(p.proof, penv, tenv, depth), self._obj(p.target, tenv, depth))
        if isinstance(p, _Injection):
            return (
                type(p).__name__,
                k(p.proof, penv, tenv, depth),
                self._obj(p.ann, tenv, depth),
            )
        return (type(p).__name__,) + tuple(k(c, penv, tenv, depth) for c in p._kids)


def alpha_keyer():
    """A function from proofs to ints that agree exactly on alpha-equal proofs.

    Keys from one keyer are comparable with each other only.
    """
    kr = _Keyer()
    return lambda p: kr.key(p, {}, {}, 0)


def alpha_eq(p: ProofTerm, q: ProofTerm) -> bool:
    """Alpha-equivalence, annotations included."""
    if p is q:
        return True
    kr = _Keyer()
    return kr.key(p, {}, {}, 0) == kr.key(q, {}, {}, 0)


def erase(p: ProofTerm) -> ProofTerm:
    """Drop every annotation; reduction behaviour is unchanged."""
    memo: dict = {}

    def go(p):
        hit = memo.get(id(p))
        if hit is not None:
            return hit[1]
        if isinstance(p, BotElim):
            out = BotElim(go(p.proof))
        elif isinstance(p, _Injection):
            out = type(p)(go(p.proof))
        elif isinstance(p, ImpIntro):
            out = ImpIntro(p.var, None, go(p.body))
        elif isinstance(p, Pack):
            out = Pack(p.witness, go(p.proof))
        else:
            out = p
            for i, c in enumerate(p._kids):
                nc = go(c)
                if nc is not c:
                    out = _rebuild(out, i, nc)
        memo[id(p)] = (p, out)
        return out

    return go(p)


def apply_all(p: ProofTerm, *args) -> ProofTerm:
    """Left-nested application; Terms become ``@!`` and proofs ``@``."""
    for a in args:
        p = TApp(p, a) if isinstance(a, Term) else App(p, a)
    return p


def lam(var: str, body: ProofTerm, domain: Prop | None = None) -> ImpIntro:
    return ImpIntro(var, domain, body)


def Lam(x: Var | str, body: ProofTerm) -> AllIntro:
    return AllIntro(x if isinstance(x, Var) else Var(x, IOTA), body)
