"""Rewrite systems, normalization and the three-valued congruence decision.

Rewriting is leftmost-outermost everywhere.  Term rules and oriented
equations act inside atoms; proposition rules (and, when enabled, the
comprehension schema) act on atoms.  Unoriented equations are only used
by a bounded bidirectional search, so once they are present a negative
answer can never be certain.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property, lru_cache
from typing import Optional, Union

from ._deep import run_deep
from .results import Fuel, FuelExhausted, Normal, OutOfFuel
from .syntax import (
    IOTA,
    Apply,
    Atom,
    ComprehensionSymbol,
    FunctionSymbol,
    Prop,
    Signature,
    SortError,
    Term,
    Var,
    _Binary,
    _Quant,
    alpha_eq,
    apply_subst,
    canonical,
    class_arity,
    fresh_var,
    head_name,
    positions,
    replace_at,
    subterm_at,
)

DEFAULT_FUEL = 10**6
DEFAULT_DEPTH = 8


class Orientation(Enum):
    LTR = "ltr"
    RTL = "rtl"
    NONE = "none"


@dataclass(frozen=True, repr=False)
class TermRule:
    lhs: Term
    rhs: Term
    name: str = ""

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise SortError("the left-hand side of a rule cannot be a variable", self.lhs)
        if self.lhs.sort != self.rhs.sort:
            raise SortError(
                f"rule sides have different sorts ({self.lhs.sort} and {self.rhs.sort})",
                self.rhs,
            )
        extra = self.rhs.free_vars - self.lhs.free_vars
        if extra:
            raise SortError(
                "rule introduces variables: " + ", ".join(sorted(v.name for v in extra)),
                self.rhs,
            )

    def __str__(self):
        return f"{self.lhs} --> {self.rhs}"

    def __repr__(self):
        return f"TermRule({self})"


@dataclass(frozen=True, repr=False)
class PropRule:
    lhs: Atom
    rhs: Prop
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.lhs, Atom):
            raise SortError("the left-hand side of a proposition rule must be an atom", self.lhs)
        extra = self.rhs.free_vars - self.lhs.free_vars
        if extra:
            raise SortError(
                "rule introduces variables: " + ", ".join(sorted(v.name for v in extra)),
                self.rhs,
            )

    def __str__(self):
        return f"{self.lhs} --> {self.rhs}"

    def __repr__(self):
        return f"PropRule({self})"


@dataclass(frozen=True)
class Equation:
    """``forall x1 ... xn, lhs = rhs`` over the free variables of both sides."""

    lhs: Term
    rhs: Term
    orientation: Orientation = Orientation.LTR
    name: str = ""

    def __post_init__(self):
        if self.lhs.sort != self.rhs.sort:
            raise SortError(
                f"equation sides have different sorts ({self.lhs.sort} and {self.rhs.sort})",
                self.rhs,
            )

    def directions(self) -> list[TermRule]:
        """The usable one-way readings of the equation (at most two)."""
        out = []
        for tag, lhs, rhs in (("ltr", self.lhs, self.rhs), ("rtl", self.rhs, self.lhs)):
            if isinstance(lhs, Var) or not rhs.free_vars <= lhs.free_vars:
                continue
            out.append(TermRule(lhs, rhs, f"{self.name or 'eq'}:{tag}"))
        return out

    def oriented_rule(self) -> Optional[TermRule]:
        if self.orientation is Orientation.NONE:
            return None
        tag = self.orientation.value
        for r in self.directions():
            if r.name.endswith(":" + tag):
                return r
        raise SortError(f"equation {self} cannot be oriented {tag}", self.lhs)

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class Limits:
    fuel: int = DEFAULT_FUEL
    depth: int = DEFAULT_DEPTH

    def __post_init__(self):
        if self.fuel < 1 or self.depth < 1:
            raise ValueError("fuel and depth must both be at least 1")

    @classmethod
    def from_env(cls, fuel: int | None = None, depth: int | None = None) -> Limits:
        if fuel is None:
            fuel = int(os.environ.get("DM_FUEL", DEFAULT_FUEL))
        return cls(fuel, DEFAULT_DEPTH if depth is None else depth)


@dataclass(frozen=True, eq=False)
class RewriteSystem:
    term_rules: tuple[TermRule, ...] = ()
    prop_rules: tuple[PropRule, ...] = ()
    equations: tuple[Equation, ...] = ()
    comprehension: bool = False
    impredicative: bool = False
    signature: Optional[Signature] = field(default=None, repr=False)

    @cached_property
    def oriented(self) -> tuple[TermRule, ...]:
        eqs = [e.oriented_rule() for e in self.equations]
        return self.term_rules + tuple(r for r in eqs if r is not None)

    @cached_property
    def unoriented(self) -> tuple[Equation, ...]:
        return tuple(e for e in self.equations if e.orientation is Orientation.NONE)

    @cached_property
    def _term_index(self) -> dict:
        idx: dict = {}
        for r in self.oriented:
            idx.setdefault(r.lhs.symbol, []).append(r)
        return idx

    @cached_property
    def _prop_index(self) -> dict:
        idx: dict = {}
        for r in self.prop_rules:
            idx.setdefault(r.lhs.pred, []).append(r)
        return idx

    @property
    def rule_count(self) -> int:
        """Rules, counting the comprehension schema as a single rule."""
        return len(self.term_rules) + len(self.prop_rules) + int(self.comprehension)

    def term_part(self) -> RewriteSystem:
        """The same system with every proposition rule removed."""
        return replace(self, prop_rules=(), comprehension=False)

    def extend(self, term_rules=(), prop_rules=(), equations=()) -> RewriteSystem:
        return replace(
            self,
            term_rules=self.term_rules + tuple(term_rules),
            prop_rules=self.prop_rules + tuple(prop_rules),
            equations=self.equations + tuple(equations),
        )


Rule = Union[TermRule, PropRule]


@dataclass(frozen=True)
class Step:
    """One rule application at ``path``; replayable with :func:`apply_step`."""

    path: tuple[int, ...]
    rule: Rule

    def __str__(self):
        where = ".".join(map(str, self.path)) or "root"
        label = self.rule.name or str(self.rule)
        return f"{label} @ {where}"

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Matching and unification


def match(pattern: Term, t: Term, s: dict) -> Optional[dict]:
    if isinstance(pattern, Var):
        bound = s.get(pattern)
        if bound is None:
            if pattern.sort != t.sort:
                return None
            s = dict(s)
            s[pattern] = t
            return s
        return s if bound == t else None
    if not isinstance(t, Apply) or t.symbol != pattern.symbol or len(t.args) != len(pattern.args):
        return None
    for p, a in zip(pattern.args, t.args):
        s = match(p, a, s)
        if s is None:
            return None
    return s


def match_atom(pattern: Atom, a: Atom) -> Optional[dict]:
    if pattern.pred != a.pred:
        return None
    s: Optional[dict] = {}
    for p, t in zip(pattern.args, a.args):
        s = match(p, t, s)
        if s is None:
            return None
    return s


def _walk(t, s):
    while isinstance(t, Var) and t in s:
        t = s[t]
    return t


def _occurs(v, t, s) -> bool:
    t = _walk(t, s)
    if t == v:
        return True
    return isinstance(t, Apply) and any(_occurs(v, a, s) for a in t.args)


def unify(a: Term, b: Term, s: Optional[dict] = None) -> Optional[dict]:
    """Most general unifier extending ``s`` (fully applied), or None."""
    s = dict(s or {})
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = _walk(x, s), _walk(y, s)
        if x == y:
            continue
        if x.sort != y.sort:
            return None
        if isinstance(x, Var):
            if _occurs(x, y, s):
                return None
            s[x] = y
        elif isinstance(y, Var):
            if _occurs(y, x, s):
                return None
            s[y] = x
        elif x.symbol == y.symbol and len(x.args) == len(y.args):
            stack.extend(zip(x.args, y.args))
        else:
            return None
    return {v: _resolve(t, s) for v, t in s.items()}


def _resolve(t, s):
    t = _walk(t, s)
    if isinstance(t, Apply) and t.args:
        return Apply(t.symbol, tuple(_resolve(a, s) for a in t.args))
    return t


# ---------------------------------------------------------------------------
# Comprehension


def is_membership(pred) -> bool:
    """``eps``-like predicates: rank (iota, ..., iota, kappa_n)."""
    n = len(pred.args) - 1
    return n >= 1 and class_arity(pred.args[-1]) == n and all(s == IOTA for s in pred.args[:-1])


def class_quantifier(body: Prop) -> Optional[Prop]:
    """First subformula quantifying over a class sort, if any."""
    stack = [body]
    while stack:
        p = stack.pop()
        if isinstance(p, _Quant):
            if class_arity(p.var.sort) is not None:
                return p
            stack.append(p.body)
        elif isinstance(p, _Binary):
            stack.extend((p.right, p.left))
        elif isinstance(p, Atom):
            for t in p.args:
                for _, sub in positions(t):
                    if isinstance(sub, Apply) and isinstance(sub.symbol, ComprehensionSymbol):
                        stack.append(sub.symbol.body)
    return None


def predicativity_violation(c: ComprehensionSymbol) -> Optional[str]:
    q = class_quantifier(c.body)
    if q is not None:
        return f"class body quantifies over sort {q.var.sort} in {q}"
    for v in c.params:
        if class_arity(v.sort) is not None:
            return f"class parameter {v.name} has class sort {v.sort}"
    return None


@lru_cache(maxsize=4096)
def class_rule(c: ComprehensionSymbol, pred) -> PropRule:
    """``eps_n(x1..xn, C(y1..yp)) --> body`` for the class symbol ``c``."""
    lhs = Atom(pred, tuple(c.bound) + (Apply(c, tuple(c.params)),))
    return PropRule(lhs, c.body, name=f"comprehension[{c.name}]")


# ---------------------------------------------------------------------------
# Single steps


def _rule_at_root(R: RewriteSystem, t: Term):
    if isinstance(t, Apply):
        for r in R._term_index.get(t.symbol, ()):
            s = match(r.lhs, t, {})
            if s is not None:
                return r, s
    return None


def _term_step(R: RewriteSystem, t: Term, path: tuple, normal: Optional[dict] = None):
    """Leftmost-outermost one-step reduct of ``t``: (new, Step) or None.

    ``normal`` maps ids of subterms already known to be normal to the
    subterms themselves; it is filled in and consulted to skip them.
    """
    res = _term_walk(R, t, {} if normal is None else normal)
    if res is None:
        return None
    new, rule, rev = res
    return new, Step(path + tuple(reversed(rev)), rule)


def _known(normal: dict, x) -> bool:
    return normal.get(id(x)) is x


def _term_walk(R, t, normal):
    # Paths are collected in reverse so each level costs O(1).
    if _known(normal, t):
        return None
    hit = _rule_at_root(R, t)
    if hit is not None:
        r, s = hit
        return apply_subst(s, r.rhs), r, []
    if isinstance(t, Apply):
        for i, a in enumerate(t.args):
            res = _term_walk(R, a, normal)
            if res is not None:
                args = list(t.args)
                args[i] = res[0]
                res[2].append(i)
                return Apply(t.symbol, tuple(args)), res[1], res[2]
    normal[id(t)] = t
    return None


def prop_rules_matching(R: RewriteSystem, a: Atom) -> list[tuple[PropRule, dict]]:
    """Every proposition rule (comprehension included) matching ``a`` at the root."""
    out = []
    for r in R._prop_index.get(a.pred, ()):
        s = match_atom(r.lhs, a)
        if s is not None:
            out.append((r, s))
    if R.comprehension and is_membership(a.pred):
        cls = a.args[-1]
        if isinstance(cls, Apply) and isinstance(cls.symbol, ComprehensionSymbol):
            c = cls.symbol
            if len(c.bound) == len(a.args) - 1 and (
                R.impredicative or predicativity_violation(c) is None
            ):
                r = class_rule(c, a.pred)
                s = match_atom(r.lhs, a)
                if s is not None:
                    out.append((r, s))
    return out


def _prop_rule_at_root(R, a: Atom):
    hits = prop_rules_matching(R, a)
    return hits[0] if hits else None


def _prop_step(R: RewriteSystem, p: Prop, path: tuple, normal: Optional[dict] = None):
    res = _prop_walk(R, p, {} if normal is None else normal)
    if res is None:
        return None
    new, rule, rev = res
    return new, Step(path + tuple(reversed(rev)), rule)


def _prop_walk(R, p, normal):
    if _known(normal, p):
        return None
    if isinstance(p, Atom):
        hit = _prop_rule_at_root(R, p)
        if hit is not None:
            r, s = hit
            return apply_subst(s, r.rhs), r, []
        for i, a in enumerate(p.args):
            res = _term_walk(R, a, normal)
            if res is not None:
                args = list(p.args)
                args[i] = res[0]
                res[2].append(i)
                return Atom(p.pred, tuple(args)), res[1], res[2]
    elif isinstance(p, _Binary):
        res = _prop_walk(R, p.left, normal)
        if res is not None:
            res[2].append(0)
            return type(p)(res[0], p.right), res[1], res[2]
        res = _prop_walk(R, p.right, normal)
        if res is not None:
            res[2].append(1)
            return type(p)(p.left, res[0]), res[1], res[2]
    elif isinstance(p, _Quant):
        res = _prop_walk(R, p.body, normal)
        if res is not None:
            res[2].append(0)
            return type(p)(p.var, res[0]), res[1], res[2]
    normal[id(p)] = p
    return None


def apply_step(x, step: Step):
    """Replay one recorded step on ``x``; raises ValueError if it does not apply."""
    sub = subterm_at(x, step.path)
    r = step.rule
    if isinstance(r, PropRule):
        s = match_atom(r.lhs, sub) if isinstance(sub, Atom) else None
    else:
        s = match(r.lhs, sub, {}) if isinstance(sub, Term) else None
    if s is None:
        raise ValueError(f"rule {r} does not apply at {step.path}")
    return replace_at(x, step.path, apply_subst(s, r.rhs))


# ---------------------------------------------------------------------------
# Normalization


def _normalize(stepper, R, x, lim: Limits, trace: bool):
    steps = []
    state = [x, 0]
    normal: dict = {}

    def go():
        while True:
            res = stepper(R, state[0], (), normal)
            if res is None:
                return Normal(state[0], state[1], tuple(steps))
            if state[1] >= lim.fuel:
                return FuelExhausted(state[0], state[1], tuple(steps))
            state[0] = res[0]
            state[1] += 1
            if trace:
                steps.append(res[1])

    try:
        return run_deep(go)
    except RecursionError:
        # the expression outgrew the stack; report it like running out of fuel
        return FuelExhausted(state[0], state[1], tuple(steps))


def normalize_term(R: RewriteSystem, t: Term, lim: Limits = Limits(), trace: bool = False):
    """Leftmost-outermost normal form of ``t`` under term rules and oriented equations."""
    return _normalize(_term_step, R, t, lim, trace)


def normalize_prop(R: RewriteSystem, A: Prop, lim: Limits = Limits(), trace: bool = False):
    """Leftmost-outermost normal form of ``A``, rewriting atoms and the terms inside them."""
    try:
        return run_deep(_normalize_prop, R, A, lim, trace)
    except RecursionError:
        return FuelExhausted(A, 0, ())


def _plug(node, i: int, child):
    if isinstance(node, _Binary):
        if i == 0:
            return node if child is node.left else type(node)(child, node.right)
        return node if child is node.right else type(node)(node.left, child)
    return node if child is node.body else type(node)(node.var, child)


def _normalize_prop(R, A, lim: Limits, trace: bool):
    # Zipper walk: connectives are never redexes, so once a subformula is
    # normal everything to its left stays normal and the walk never restarts.
    frames: list = []  # (parent, index of the child in focus)
    focus = A
    count = 0
    steps: list = []
    normal: dict = {}
    down = True

    def whole():
        x = focus
        for parent, i in reversed(frames):
            x = _plug(parent, i, x)
        return x

    while True:
        if down:
            if isinstance(focus, Atom):
                res = _prop_walk(R, focus, normal)
                if res is not None:
                    if count >= lim.fuel:
                        return FuelExhausted(whole(), count, tuple(steps))
                    focus = res[0]
                    count += 1
                    if trace:
                        path = tuple(i for _, i in frames) + tuple(reversed(res[2]))
                        steps.append(Step(path, res[1]))
                    continue
                down = False
            elif isinstance(focus, _Binary):
                frames.append((focus, 0))
                focus = focus.left
            elif isinstance(focus, _Quant):
                frames.append((focus, 0))
                focus = focus.body
            else:
                down = False
            continue
        if not frames:
            return Normal(focus, count, tuple(steps))
        parent, i = frames.pop()
        parent = _plug(parent, i, focus)
        if isinstance(parent, _Binary) and i == 0:
            frames.append((parent, 1))
            focus = parent.right
            down = True
        else:
            focus = parent


def _norm_term_fuel(R, t, fuel: Fuel, path, sink) -> Term:
    normal: dict = {}
    while True:
        res = _term_step(R, t, path, normal)
        if res is None:
            return t
        fuel.spend()
        t = res[0]
        if sink is not None:
            sink.append(res[1])


def _norm_atom_fuel(R, a: Atom, fuel: Fuel, path, sink) -> Atom:
    args = tuple(
        _norm_term_fuel(R, t, fuel, path + (i,), sink) for i, t in enumerate(a.args)
    )
    return a if args == a.args else Atom(a.pred, args)


def _unfold(R, a: Atom, fuel: Fuel, path, sink) -> Optional[Prop]:
    """One proposition-rule step at the root of an argument-normal atom."""
    hit = _prop_rule_at_root(R, a)
    if hit is None:
        return None
    r, s = hit
    fuel.spend()
    if sink is not None:
        sink.append(Step(path, r))
    out = apply_subst(s, r.rhs)
    if isinstance(out, Atom):
        out = _norm_atom_fuel(R, out, fuel, path, sink)
    return out


@dataclass(frozen=True)
class Exposed:
    value: Prop
    trace: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class StillAtomic:
    value: Atom
    trace: tuple = field(default=(), repr=False)


def head_expose(R: RewriteSystem, A: Prop, lim: Limits = Limits()):
    """Rewrite an atom at the root until a connective or quantifier shows.

    Returns :class:`Exposed`, :class:`StillAtomic` (no rule applies to the
    argument-normal atom) or :class:`FuelExhausted`.
    """
    if not isinstance(A, Atom):
        return Exposed(A)
    fuel = Fuel(lim.fuel)
    steps: list = []
    seen = set()
    try:
        A = _norm_atom_fuel(R, A, fuel, (), steps)
        while isinstance(A, Atom):
            key = canonical(A)
            if key in seen:
                return FuelExhausted(A, fuel.used, tuple(steps))
            seen.add(key)
            nxt = _unfold(R, A, fuel, (), steps)
            if nxt is None:
                return StillAtomic(A, tuple(steps))
            A = nxt
    except OutOfFuel:
        return FuelExhausted(A, fuel.used, tuple(steps))
    return Exposed(A, tuple(steps))


# ---------------------------------------------------------------------------
# Congruence


@dataclass(frozen=True)
class Equivalent:
    """Both sides join; ``left``/``right`` are the steps taken on each side."""

    left: tuple[Step, ...] = ()
    right: tuple[Step, ...] = ()

    def replay(self, a, b) -> bool:
        for s in self.left:
            a = apply_step(a, s)
        for s in self.right:
            b = apply_step(b, s)
        return alpha_eq(a, b)


@dataclass(frozen=True)
class Distinct:
    reason: str = ""
    caveat: str = "sound only if the rewrite system is terminating and confluent"


@dataclass(frozen=True)
class Undecided:
    reason: str = ""


CongruenceVerdict = Union[Equivalent, Distinct, Undecided]

_EQ = "eq"
_DIST = "distinct"


class _Und(str):
    pass


def _combine(*vs):
    und = None
    for v in vs:
        if v == _DIST and not isinstance(v, _Und):
            return _DIST
        if isinstance(v, _Und):
            und = v
    return und if und is not None else _EQ


def _term_neighbours(rules, t: Term):
    """All one-step rewrites of ``t`` at any position: (new_term, Step) pairs."""
    out = []
    for path, sub in positions(t):
        if not isinstance(sub, Apply):
            continue
        for r in rules.get(sub.symbol, ()):
            s = match(r.lhs, sub, {})
            if s is not None:
                out.append((replace_at(t, path, apply_subst(s, r.rhs)), Step(path, r)))
    return out


def _index(rules) -> dict:
    idx: dict = {}
    for r in rules:
        idx.setdefault(r.lhs.symbol, []).append(r)
    return idx


def _bfs_join(rules_idx, t: Term, u: Term, depth: int, fuel: Fuel, cap: int = 20000):
    """Bidirectional breadth-first search for a common term.

    Returns (steps from t, steps from u) or None.
    """
    if t == u:
        return (), ()
    seen = [{t: None}, {u: None}]
    frontier = [[t], [u]]
    for level in range(depth):
        side = level % 2 if frontier[0] and frontier[1] else (0 if frontier[0] else 1)
        if not frontier[side]:
            break
        nxt = []
        for x in frontier[side]:
            for y, step in _term_neighbours(rules_idx, x):
                fuel.spend()
                if y in seen[side]:
                    continue
                seen[side][y] = (x, step)
                if y in seen[1 - side]:
                    a = _unwind(seen[side], y)
                    b = _unwind(seen[1 - side], y)
                    return (a, b) if side == 0 else (b, a)
                nxt.append(y)
                if len(seen[side]) > cap:
                    return None
        frontier[side] = nxt
    return None


def _unwind(seen, y):
    steps = []
    while seen[y] is not None:
        y, step = seen[y]
        steps.append(step)
    return tuple(reversed(steps))


def _shift(steps, prefix):
    return [Step(prefix + s.path, s.rule) for s in steps]


class _Comparator:
    def __init__(self, R: RewriteSystem, lim: Limits):
        self.R = R
        self.lim = lim
        self.fuel = Fuel(lim.fuel)
        self.left: list = []
        self.right: list = []
        self._search_idx = None

    @property
    def search_index(self):
        if self._search_idx is None:
            rules = list(self.R.oriented)
            for e in self.R.unoriented:
                rules.extend(e.directions())
            self._search_idx = _index(rules)
        return self._search_idx

    # terms ---------------------------------------------------------------

    def terms(self, t: Term, u: Term, path: tuple, lsink, rsink):
        if t == u:
            return _EQ
        t = _norm_term_fuel(self.R, t, self.fuel, path, lsink)
        u = _norm_term_fuel(self.R, u, self.fuel, path, rsink)
        if t == u:
            return _EQ
        if self.R.unoriented:
            found = _bfs_join(self.search_index, t, u, self.lim.depth, self.fuel)
            if found is None:
                return _Und(f"no equational join of {t} and {u} within depth {self.lim.depth}")
            lsink.extend(_shift(found[0], path))
            rsink.extend(_shift(found[1], path))
            return _EQ
        return _DIST

    # propositions --------------------------------------------------------

    def props(self, a: Prop, b: Prop, path: tuple):
        if alpha_eq(a, b):
            return _EQ
        if isinstance(a, Atom) or isinstance(b, Atom):
            return self.atoms(a, b, path)
        if type(a) is not type(b):
            return _DIST
        if isinstance(a, _Binary):
            v = self.props(a.left, b.left, path + (0,))
            if v == _DIST and not isinstance(v, _Und):
                return _DIST
            return _combine(v, self.props(a.right, b.right, path + (1,)))
        if isinstance(a, _Quant):
            if a.var.sort != b.var.sort:
                return _DIST
            avoid = {v.name for v in a.free_vars | b.free_vars}
            z = a.var if a.var.name not in avoid else fresh_var(a.var, avoid)
            return self.props(
                apply_subst({a.var: z}, a.body), apply_subst({b.var: z}, b.body), path + (0,)
            )
        return _EQ  # top/top, bot/bot

    def _same_atom(self, a: Atom, b: Atom, path):
        if a.pred != b.pred:
            return _DIST
        ls, rs = [], []
        vs = []
        for i, (t, u) in enumerate(zip(a.args, b.args)):
            v = self.terms(t, u, path + (i,), ls, rs)
            if v == _DIST and not isinstance(v, _Und):
                return _DIST
            vs.append(v)
        v = _combine(*vs)
        if v == _EQ:
            self.left.extend(ls)
            self.right.extend(rs)
        return v

    def _chain(self, p: Prop, path, chain):
        """Extend an unfolding chain by one step; returns False when stuck."""
        last, _ = chain[-1]
        if not isinstance(last, Atom):
            return False
        steps: list = []
        nxt = _unfold(self.R, last, self.fuel, path, steps)
        if nxt is None:
            return False
        if isinstance(nxt, Atom) and any(
            isinstance(q, Atom) and alpha_eq(q, nxt) for q, _ in chain
        ):
            return False
        chain.append((nxt, chain[-1][1] + steps))
        return True

    def atoms(self, a: Prop, b: Prop, path: tuple):
        la: list = []
        lb: list = []
        if isinstance(a, Atom):
            a = _norm_atom_fuel(self.R, a, self.fuel, path, la)
        if isinstance(b, Atom):
            b = _norm_atom_fuel(self.R, b, self.fuel, path, lb)
        ca = [(a, la)]
        cb = [(b, lb)]
        undecided = None
        checked = set()

        def try_pairs():
            nonlocal undecided
            for i, (x, sx) in enumerate(ca):
                for j, (y, sy) in enumerate(cb):
                    if (i, j) in checked or not (isinstance(x, Atom) and isinstance(y, Atom)):
                        continue
                    checked.add((i, j))
                    v = self._same_atom(x, y, path)
                    if v == _EQ:
                        self.left.extend(sx)
                        self.right.extend(sy)
                        return True
                    if isinstance(v, _Und):
                        undecided = v
            return False

        if try_pairs():
            return _EQ
        while True:
            grew_a = self._chain(a, path, ca)
            grew_b = self._chain(b, path, cb)
            if not (grew_a or grew_b):
                break
            if try_pairs():
                return _EQ
        x, sx = ca[-1]
        y, sy = cb[-1]
        if isinstance(x, Atom) or isinstance(y, Atom):
            if undecided is not None:
                return undecided
            if self.R.unoriented:
                return _Und("atom is stuck under oriented rules only")
            return _DIST
        self.left.extend(sx)
        self.right.extend(sy)
        return self.props(x, y, path)


def decide_congruence(R: RewriteSystem, A, B, lim: Limits = Limits()) -> CongruenceVerdict:
    """Decide ``A == B`` modulo the congruence generated by ``R``.

    Works lazily: atoms are only unfolded when their heads disagree, so
    propositions whose full normal form is infinite (``N(t)`` in
    arithmetic) can still be compared.  :class:`Equivalent` carries a
    replayable trace.  :class:`Distinct` relies on confluence and is never
    returned when unoriented equations are present.
    """
    cmp = _Comparator(R, lim)
    try:
        if isinstance(A, Term):
            if not isinstance(B, Term) or A.sort != B.sort:
                raise SortError("can only compare terms of the same sort", B)
            v = cmp.terms(A, B, (), cmp.left, cmp.right)
        else:
            v = cmp.props(A, B, ())
    except OutOfFuel:
        return Undecided(f"fuel exhausted after {cmp.fuel.used} steps")
    if isinstance(v, _Und):
        return Undecided(str(v))
    if v == _EQ:
        return Equivalent(tuple(cmp.left), tuple(cmp.right))
    if R.unoriented:
        return Undecided("unoriented equations present; distinctness is not decidable")
    return Distinct(f"{A} and {B} have different normal heads")


def joinable(R: RewriteSystem, t: Term, u: Term, lim: Limits = Limits()) -> Optional[bool]:
    """True/False by comparing normal forms; None when fuel runs out."""
    a = normalize_term(R, t, lim)
    b = normalize_term(R, u, lim)
    if not (a.normal and b.normal):
        return None
    return a.value == b.value


# ---------------------------------------------------------------------------
# Localized rewriting of atoms modulo the term congruence


@dataclass(frozen=True)
class LocalStep:
    occurrence: tuple[int, ...]
    rule: PropRule
    subst: dict = field(hash=False, compare=False)
    result: Prop = None


def localized_step(R: RewriteSystem, A: Prop, lim: Limits = Limits()) -> list[LocalStep]:
    """All one-step proposition-rule rewrites of ``A`` modulo the term part of ``R``.

    Each atom occurrence has its arguments normalized by the term rules and
    oriented equations before matching, so ``A|o`` is congruent to ``sigma(l)``
    and the result is ``A[sigma(r)]o``.
    """
    out = []
    fuel = Fuel(lim.fuel)
    for path, sub in positions(A):
        if not isinstance(sub, Atom):
            continue
        try:
            atom = _norm_atom_fuel(R, sub, fuel, path, None)
        except OutOfFuel:
            continue
        for r, s in prop_rules_matching(R, atom):
            out.append(LocalStep(path, r, s, replace_at(A, path, apply_subst(s, r.rhs))))
    return out


@dataclass(frozen=True)
class Peak:
    source: Prop
    left: LocalStep
    right: LocalStep


def unjoined_peaks(R: RewriteSystem, A: Prop, lim: Limits = Limits()) -> list[Peak]:
    """Pairs of distinct one-step reducts of ``A`` that fail to join.

    Each side may take at most one further localized step; two propositions
    join when the congruence decision says Equivalent.
    """
    steps = localized_step(R, A, lim)
    after = {}

    def reach(st):
        key = id(st)
        if key not in after:
            after[key] = [st.result] + [s.result for s in localized_step(R, st.result, lim)]
        return after[key]

    bad = []
    for i, s1 in enumerate(steps):
        for s2 in steps[i + 1:]:
            if alpha_eq(s1.result, s2.result):
                continue
            if not any(
                isinstance(decide_congruence(R, c1, c2, lim), Equivalent)
                for c1 in reach(s1)
                for c2 in reach(s2)
            ):
                bad.append(Peak(A, s1, s2))
    return bad


# ---------------------------------------------------------------------------
# Critical pairs


@dataclass(frozen=True)
class CriticalPair:
    peak: Term
    left: Term
    right: Term
    outer: TermRule
    inner: TermRule
    position: tuple[int, ...]


def _rename_apart(rule: TermRule, avoid: set[str]) -> TermRule:
    s = {}
    for v in sorted(rule.lhs.free_vars, key=lambda v: v.name):
        name = v.name
        while name in avoid:
            name += "'"
        s[v] = Var(name, v.sort)
    return TermRule(apply_subst(s, rule.lhs), apply_subst(s, rule.rhs), rule.name)


def critical_pairs(rules) -> list[CriticalPair]:
    """Overlaps of left-hand sides at non-variable positions."""
    rules = list(rules)
    out = []
    for i, outer in enumerate(rules):
        names = {v.name for v in outer.lhs.free_vars}
        for j, inner0 in enumerate(rules):
            inner = _rename_apart(inner0, names)
            for path, sub in positions(outer.lhs):
                if isinstance(sub, Var) or (i == j and path == ()):
                    continue
                s = unify(sub, inner.lhs)
                if s is None:
                    continue
                peak = apply_subst(s, outer.lhs)
                left = apply_subst(s, outer.rhs)
                right = replace_at(peak, path, apply_subst(s, inner.rhs))
                out.append(CriticalPair(peak, left, right, outer, inner0, path))
    return out


# ---------------------------------------------------------------------------
# The 0 != S(t) guard


@dataclass(frozen=True)
class NoneFoundUpToDepth:
    depth: int
    explored: int = 0


@dataclass(frozen=True)
class ViolationFound:
    term: Term
    trace: tuple = ()


def _find_symbol(R: RewriteSystem, name: str, default: FunctionSymbol) -> FunctionSymbol:
    if R.signature is not None and name in R.signature.functions:
        return R.signature.functions[name]
    terms = [x for r in R.term_rules for x in (r.lhs, r.rhs)]
    terms += [x for e in R.equations for x in (e.lhs, e.rhs)]
    for t in terms:
        for _, sub in positions(t):
            if isinstance(sub, Apply) and sub.symbol.name == name:
                return sub.symbol
    return default


def _descent_equations(R, succ) -> list[tuple[Term, Term]]:
    """Equations obtained by stripping a common successor, when ``Pred(S(x)) --> x`` holds."""
    has_pred = any(
        isinstance(r.rhs, Var)
        and len(r.lhs.args) == 1
        and isinstance(r.lhs.args[0], Apply)
        and r.lhs.args[0].symbol == succ
        and r.lhs.args[0].args == (r.rhs,)
        for r in R.term_rules
    )
    if not has_pred:
        return []
    pairs = [(e.lhs, e.rhs) for e in R.equations]
    derived = []
    while pairs:
        l, r = pairs.pop()
        if (
            isinstance(l, Apply)
            and isinstance(r, Apply)
            and l.symbol == succ
            and r.symbol == succ
        ):
            pair = (l.args[0], r.args[0])
            derived.append(pair)
            pairs.append(pair)
    return derived


def guard_zero_succ(R: RewriteSystem, lim: Limits = Limits(), cap: int = 20000):
    """Semi-decide whether ``0`` is congruent to some ``S(t)``.

    Breadth-first search from ``0`` using term rules forwards and every
    equation in both directions, plus equations derived by stripping a
    common successor from both sides (justified by ``Pred(S(x)) --> x``).
    ``NoneFoundUpToDepth`` is not a proof that no violation exists.
    """
    zero = _find_symbol(R, "0", FunctionSymbol("0", (), IOTA))
    succ = _find_symbol(R, "S", FunctionSymbol("S", (IOTA,), IOTA))
    rules = list(R.term_rules)
    for e in R.equations:
        rules.extend(e.directions())
    for k, (l, r) in enumerate(_descent_equations(R, succ)):
        rules.extend(Equation(l, r, Orientation.NONE, f"descent{k}").directions())
    idx = _index(rules)
    start = Apply(zero, ())
    parent = {start: None}
    frontier = [start]
    for level in range(lim.depth):
        nxt = []
        for t in frontier:
            for u, step in _term_neighbours(idx, t):
                if u in parent:
                    continue
                parent[u] = (t, step)
                if isinstance(u, Apply) and u.symbol == succ:
                    return ViolationFound(u, _unwind(parent, u))
                nxt.append(u)
                if len(parent) > cap:
                    return NoneFoundUpToDepth(level + 1, len(parent))
        frontier = nxt
        if not frontier:
            break
    return NoneFoundUpToDepth(lim.depth, len(parent))


# ---------------------------------------------------------------------------
# Non-confusion


@dataclass(frozen=True)
class NonConfusionOk:
    pass


@dataclass(frozen=True)
class CounterexampleSuspect:
    left: Prop
    right: Prop
    reason: str


def non_confusion_check(R: RewriteSystem, A: Prop, B: Prop, lim: Limits = Limits()):
    """Check that congruent ``A`` and ``B`` agree on heads, componentwise.

    Atomic inputs are head-exposed first.  Raises ValueError if ``A`` and
    ``B`` are not known to be congruent.
    """
    if not isinstance(decide_congruence(R, A, B, lim), Equivalent):
        raise ValueError("non_confusion_check needs congruent propositions")
    return _nc(R, A, B, lim, lim.depth)


def _nc(R, A, B, lim, budget):
    ea, eb = head_expose(R, A, lim), head_expose(R, B, lim)
    if isinstance(ea, FuelExhausted) or isinstance(eb, FuelExhausted):
        return NonConfusionOk()
    a, b = ea.value, eb.value
    if isinstance(a, Atom) or isinstance(b, Atom):
        if isinstance(a, Atom) and isinstance(b, Atom):
            return NonConfusionOk()
        return CounterexampleSuspect(a, b, "an atom is congruent to a compound proposition")
    if type(a) is not type(b):
        return CounterexampleSuspect(
            a, b, f"heads differ: {head_name(a)} versus {head_name(b)}"
        )
    if isinstance(a, _Binary):
        pairs = [(a.left, b.left), (a.right, b.right)]
    elif isinstance(a, _Quant):
        if a.var.sort != b.var.sort:
            return CounterexampleSuspect(a, b, "quantifier sorts differ")
        avoid = {v.name for v in a.free_vars | b.free_vars}
        z = a.var if a.var.name not in avoid else fresh_var(a.var, avoid)
        pairs = [(apply_subst({a.var: z}, a.body), apply_subst({b.var: z}, b.body))]
    else:
        return NonConfusionOk()
    for x, y in pairs:
        v = decide_congruence(R, x, y, lim)
        if isinstance(v, Distinct):
            return CounterexampleSuspect(x, y, "components are not congruent")
        if budget > 1 and isinstance(v, Equivalent):
            sub = _nc(R, x, y, lim, budget - 1)
            if isinstance(sub, CounterexampleSuspect):
                return sub
    return NonConfusionOk()


__all__ = [
    "Orientation",
    "TermRule",
    "PropRule",
    "Equation",
    "RewriteSystem",
    "Limits",
    "Step",
    "match",
    "unify",
    "normalize_term",
    "normalize_prop",
    "head_expose",
    "Exposed",
    "StillAtomic",
    "decide_congruence",
    "Equivalent",
    "Distinct",
    "Undecided",
    "joinable",
    "localized_step",
    "LocalStep",
    "critical_pairs",
    "CriticalPair",
    "guard_zero_succ",
    "NoneFoundUpToDepth",
    "ViolationFound",
    "non_confusion_check",
    "NonConfusionOk",
    "CounterexampleSuspect",
    "apply_step",
    "Normal",
    "FuelExhausted",
]
