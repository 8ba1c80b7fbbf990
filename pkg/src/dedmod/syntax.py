"""Many-sorted first-order terms and propositions.

Binders use named variables with a fresh-name discipline; every equality
test that matters goes through :func:`alpha_eq`.  All nodes are frozen
dataclasses, so values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Union


class SortError(Exception):
    """Raised on ill-sorted input; ``subterm`` names the first offender."""

    def __init__(self, message: str, subterm=None):
        super().__init__(message)
        self.subterm = subterm


@dataclass(frozen=True)
class Sort:
    name: str

    def __str__(self):
        return self.name


IOTA = Sort("iota")
KAPPA = Sort("kappa")


def kappa(n: int) -> Sort:
    """Sort of n-ary classes; the unary one is plain ``kappa``."""
    return KAPPA if n == 1 else Sort(f"kappa_{n}")


def class_arity(sort: Sort) -> int | None:
    if sort == KAPPA:
        return 1
    if sort.name.startswith("kappa_"):
        try:
            return int(sort.name[len("kappa_"):])
        except ValueError:
            return None
    return None


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    args: tuple[Sort, ...]
    result: Sort

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PredicateSymbol:
    name: str
    args: tuple[Sort, ...]

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self):
        return self.name


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()

    @property
    def sort(self) -> Sort:
        raise NotImplementedError


@dataclass(frozen=True)
class Var(Term):
    name: str
    sort: Sort = IOTA

    @cached_property
    def free_vars(self) -> frozenset[Var]:
        return frozenset((self,))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Apply(Term):
    symbol: Union[FunctionSymbol, "ComprehensionSymbol"]
    args: tuple[Term, ...] = ()

    @property
    def sort(self) -> Sort:
        return self.symbol.result

    @cached_property
    def free_vars(self) -> frozenset[Var]:
        if not self.args:
            return frozenset()
        return frozenset().union(*(a.free_vars for a in self.args))

    def __str__(self):
        from .printer import show_term

        return show_term(self)


class ComprehensionSymbol:
    """Skolem symbol naming the class ``{bound | params | body}``.

    As a function symbol it has rank ``params -> kappa_n`` with
    ``n = len(bound)``.  Identity is alpha-equivalence of the triple, so
    two literals that differ only in variable names denote one symbol.
    """

    __slots__ = ("bound", "params", "body", "__dict__")

    def __init__(self, bound: Iterable[Var], params: Iterable[Var], body: "Prop"):
        bound = tuple(bound)
        params = tuple(params)
        if not bound:
            raise SortError("a class needs at least one bound variable")
        names = [v.name for v in bound + params]
        if len(set(names)) != len(names):
            raise SortError("class variables must be pairwise distinct")
        stray = body.free_vars - set(bound) - set(params)
        if stray:
            raise SortError(
                "class body has free variables outside its parameters: "
                + ", ".join(sorted(v.name for v in stray)),
                body,
            )
        object.__setattr__(self, "bound", bound)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "body", body)

    def __setattr__(self, key, value):
        raise AttributeError("ComprehensionSymbol is immutable")

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def args(self) -> tuple[Sort, ...]:
        return tuple(v.sort for v in self.params)

    @property
    def result(self) -> Sort:
        return kappa(len(self.bound))

    @property
    def name(self) -> str:
        from .printer import show_class

        return show_class(self)

    @cached_property
    def key(self):
        env = {}
        for i, v in enumerate(self.bound):
            env[v] = ("b", i, v.sort.name)
        for i, v in enumerate(self.params):
            env[v] = ("p", i, v.sort.name)
        return (
            tuple(v.sort.name for v in self.bound),
            tuple(v.sort.name for v in self.params),
            _canon(self.body, env, 0),
        )

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, ComprehensionSymbol):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"ComprehensionSymbol({self.name})"

    __str__ = name.fget


# ---------------------------------------------------------------------------
# Propositions


class Prop:
    __slots__ = ()

    def __str__(self):
        from .printer import show_prop

        return show_prop(self)


@dataclass(frozen=True, repr=False)
class Atom(Prop):
    pred: PredicateSymbol
    args: tuple[Term, ...] = ()

    @cached_property
    def free_vars(self) -> frozenset[Var]:
        if not self.args:
            return frozenset()
        return frozenset().union(*(a.free_vars for a in self.args))

    def __repr__(self):
        return f"Atom({self})"


@dataclass(frozen=True, repr=False)
class Top(Prop):
    free_vars = frozenset()

    def __repr__(self):
        return "Top()"


@dataclass(frozen=True, repr=False)
class Bot(Prop):
    free_vars = frozenset()

    def __repr__(self):
        return "Bot()"


TOP = Top()
BOT = Bot()


@dataclass(frozen=True, repr=False)
class _Binary(Prop):
    left: Prop
    right: Prop

    @cached_property
    def free_vars(self) -> frozenset[Var]:
        return self.left.free_vars | self.right.free_vars

    def __repr__(self):
        return f"{type(self).__name__}({self})"


class And(_Binary):
    pass


class Or(_Binary):
    pass


class Implies(_Binary):
    pass


@dataclass(frozen=True, repr=False)
class _Quant(Prop):
    var: Var
    body: Prop

    @cached_property
    def free_vars(self) -> frozenset[Var]:
        return self.body.free_vars - {self.var}

    def __repr__(self):
        return f"{type(self).__name__}({self})"


class Forall(_Quant):
    pass


class Exists(_Quant):
    pass


def implies(*props: Prop) -> Prop:
    """Right-nested implication ``A1 => A2 => ... => An``."""
    out = props[-1]
    for p in reversed(props[:-1]):
        out = Implies(p, out)
    return out


def free_vars(x) -> frozenset[Var]:
    return x.free_vars


def head_name(p: Prop) -> str:
    """Connective/quantifier tag, or ``atom``."""
    return {
        Atom: "atom",
        Top: "top",
        Bot: "bot",
        And: "and",
        Or: "or",
        Implies: "implies",
        Forall: "forall",
        Exists: "exists",
    }[type(p)]


# ---------------------------------------------------------------------------
# Substitution


def fresh_name(base: str, avoid) -> str:
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def fresh_var(v: Var, avoid) -> Var:
    return Var(fresh_name(v.name, avoid), v.sort)


def _names(vs) -> set[str]:
    return {v.name for v in vs}


def apply_subst(s: Mapping[Var, Term], x):
    """Simultaneous capture-avoiding substitution on a term or proposition."""
    for v, t in s.items():
        if v.sort != t.sort:
            raise SortError(
                f"cannot substitute {t} of sort {t.sort} for {v.name} of sort {v.sort}", t
            )
    s = {v: t for v, t in s.items() if v != t}
    if not s:
        return x
    if isinstance(x, Term):
        return _subst_term(x, s)
    return _subst_prop(x, s)


def _subst_term(t: Term, s) -> Term:
    if isinstance(t, Var):
        return s.get(t, t)
    if not t.args or not (t.free_vars & s.keys()):
        return t
    return Apply(t.symbol, tuple(_subst_term(a, s) for a in t.args))


def _subst_prop(p: Prop, s) -> Prop:
    fv = p.free_vars
    s = {v: t for v, t in s.items() if v in fv}
    if not s:
        return p
    if isinstance(p, Atom):
        return Atom(p.pred, tuple(_subst_term(a, s) for a in p.args))
    if isinstance(p, _Binary):
        return type(p)(_subst_prop(p.left, s), _subst_prop(p.right, s))
    if isinstance(p, _Quant):
        v = p.var
        incoming = set().union(*(_names(t.free_vars) for t in s.values()))
        if v.name in incoming:
            nv = fresh_var(v, incoming | _names(p.body.free_vars) | _names(s))
            s = dict(s)
            s[v] = nv
            return type(p)(nv, _subst_prop(p.body, s))
        return type(p)(v, _subst_prop(p.body, s))
    return p


def compose(s: Mapping[Var, Term], t: Mapping[Var, Term]) -> dict[Var, Term]:
    """Substitution equal to applying ``t`` first and then ``s``."""
    out = {v: apply_subst(s, u) for v, u in t.items()}
    for v, u in s.items():
        out.setdefault(v, u)
    return out


# ---------------------------------------------------------------------------
# Alpha-equivalence


def _canon(x, env: dict, depth: int):
    """Nameless canonical form; ``env`` maps bound Vars to binder depth or tags."""
    if isinstance(x, Var):
        b = env.get(x)
        if b is None:
            return ("v", x.name, x.sort.name)
        if isinstance(b, tuple):
            return b
        return ("i", depth - b)
    if isinstance(x, Apply):
        sym = x.symbol
        sk = sym.key if isinstance(sym, ComprehensionSymbol) else sym
        return ("f", sk, tuple(_canon(a, env, depth) for a in x.args))
    if isinstance(x, Atom):
        return ("P", x.pred, tuple(_canon(a, env, depth) for a in x.args))
    if isinstance(x, Top):
        return ("T",)
    if isinstance(x, Bot):
        return ("F",)
    if isinstance(x, _Binary):
        return (
            type(x).__name__,
            _canon(x.left, env, depth),
            _canon(x.right, env, depth),
        )
    if isinstance(x, _Quant):
        inner = dict(env)
        inner[x.var] = depth + 1
        return (type(x).__name__, x.var.sort.name, _canon(x.body, inner, depth + 1))
    raise TypeError(f"not a term or proposition: {x!r}")


def canonical(x):
    """Hashable key with ``canonical(a) == canonical(b)`` iff alpha-equal."""
    if isinstance(x, ComprehensionSymbol):
        return x.key
    try:
        return x.__dict__["_canonical"]
    except KeyError:
        key = _canon(x, {}, 0)
        x.__dict__["_canonical"] = key
        return key


def alpha_eq(a, b) -> bool:
    if a is b:
        return True
    return type(a) is type(b) and canonical(a) == canonical(b)


# ---------------------------------------------------------------------------
# Positions


def children(x) -> tuple:
    if isinstance(x, (Apply, Atom)):
        return x.args
    if isinstance(x, _Binary):
        return (x.left, x.right)
    if isinstance(x, _Quant):
        return (x.body,)
    return ()


def with_children(x, kids):
    if isinstance(x, Apply):
        return Apply(x.symbol, tuple(kids))
    if isinstance(x, Atom):
        return Atom(x.pred, tuple(kids))
    if isinstance(x, _Binary):
        return type(x)(*kids)
    if isinstance(x, _Quant):
        return type(x)(x.var, kids[0])
    return x


def subterm_at(x, path: tuple[int, ...]):
    for i in path:
        x = children(x)[i]
    return x


def replace_at(x, path: tuple[int, ...], new):
    """Graft ``new`` at ``path`` (no renaming: binders above may capture)."""
    if not path:
        return new
    kids = list(children(x))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(x, kids)


def positions(x, prefix=()):
    yield prefix, x
    for i, c in enumerate(children(x)):
        yield from positions(c, prefix + (i,))


# ---------------------------------------------------------------------------
# Signatures and sort checking


@dataclass
class Signature:
    sorts: dict[str, Sort]
    functions: dict[str, FunctionSymbol]
    predicates: dict[str, PredicateSymbol]

    @classmethod
    def empty(cls) -> Signature:
        return cls({}, {}, {})

    def copy(self) -> Signature:
        return Signature(dict(self.sorts), dict(self.functions), dict(self.predicates))

    def add_sort(self, sort: Sort):
        self.sorts[sort.name] = sort

    def add_function(self, f: FunctionSymbol):
        if f.name in self.functions and self.functions[f.name] != f:
            raise SortError(f"function symbol {f.name} declared twice")
        for s in f.args + (f.result,):
            self._require_sort(s)
        self.functions[f.name] = f

    def add_predicate(self, p: PredicateSymbol):
        if p.name in self.predicates and self.predicates[p.name] != p:
            raise SortError(f"predicate symbol {p.name} declared twice")
        for s in p.args:
            self._require_sort(s)
        self.predicates[p.name] = p

    def _require_sort(self, s: Sort):
        if s.name not in self.sorts:
            if class_arity(s) is not None:
                self.sorts[s.name] = s
            else:
                raise SortError(f"unknown sort {s.name}")


def check_sorting(sig: Signature, x, scope: Mapping[str, Sort] | None = None) -> None:
    """Raise :class:`SortError` unless ``x`` is well-sorted under ``sig``.

    ``scope`` optionally pins the sorts of free variables by name.
    """
    if isinstance(x, Term):
        _check_term(sig, x, scope or {})
    else:
        _check_prop(sig, x, dict(scope or {}))


def _check_term(sig, t, scope):
    if isinstance(t, Var):
        if t.sort.name not in sig.sorts:
            raise SortError(f"unknown sort {t.sort.name} for variable {t.name}", t)
        want = scope.get(t.name)
        if want is not None and want != t.sort:
            raise SortError(
                f"sort mismatch: variable {t.name} is {want}, used as {t.sort}", t
            )
        return
    sym = t.symbol
    if isinstance(sym, ComprehensionSymbol):
        _check_class(sig, sym)
    elif sig.functions.get(sym.name) != sym:
        raise SortError(f"unknown function symbol {sym.name}", t)
    if len(t.args) != len(sym.args):
        raise SortError(
            f"arity mismatch: {sym.name} expects {len(sym.args)} arguments, got {len(t.args)}",
            t,
        )
    for a, s in zip(t.args, sym.args):
        _check_term(sig, a, scope)
        if a.sort != s:
            raise SortError(
                f"sort mismatch: argument {a} of {sym.name} has sort {a.sort}, expected {s}", a
            )


def _check_class(sig, c: ComprehensionSymbol):
    scope = {v.name: v.sort for v in c.bound + c.params}
    for v in c.bound:
        if v.sort != IOTA:
            raise SortError(f"class variable {v.name} must have sort iota", v)
    _check_prop(sig, c.body, scope)


def _check_prop(sig, p, scope):
    if isinstance(p, Atom):
        pred = p.pred
        if sig.predicates.get(pred.name) != pred:
            raise SortError(f"unknown predicate symbol {pred.name}", p)
        if len(p.args) != len(pred.args):
            raise SortError(
                f"arity mismatch: {pred.name} expects {len(pred.args)} arguments, got {len(p.args)}",
                p,
            )
        for a, s in zip(p.args, pred.args):
            _check_term(sig, a, scope)
            if a.sort != s:
                raise SortError(
                    f"sort mismatch: argument {a} of {pred.name} has sort {a.sort}, expected {s}",
                    a,
                )
    elif isinstance(p, _Binary):
        _check_prop(sig, p.left, scope)
        _check_prop(sig, p.right, scope)
    elif isinstance(p, _Quant):
        if p.var.sort.name not in sig.sorts:
            raise SortError(f"unknown sort {p.var.sort.name}", p)
        inner = dict(scope)
        inner[p.var.name] = p.var.sort
        _check_prop(sig, p.body, inner)
