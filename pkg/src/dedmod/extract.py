"""Running program proofs on numerals and projecting away correctness parts."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

from . import proofterm as P
from .arith import (
    HATheory,
    decode_numeral,
    eq,
    nat,
    numeral,
    numeral_value,
    parigot,
    program_shape,
)
from .rewrite import (
    Equation,
    Equivalent,
    Limits,
    NoneFoundUpToDepth,
    RewriteSystem,
    ViolationFound,
    decide_congruence,
    guard_zero_succ,
    normalize_term,
)
from .syntax import (
    IOTA,
    And,
    Apply,
    Exists,
    FunctionSymbol,
    Prop,
    SortError,
    Term,
    Var,
    check_sorting,
)


@dataclass(frozen=True)
class EquationalSpec:
    """``main`` is specified by equations over itself and ``auxiliaries``."""

    main: FunctionSymbol
    auxiliaries: tuple[FunctionSymbol, ...] = ()
    equations: tuple[Equation, ...] = ()

    def __post_init__(self):
        for e in self.equations:
            if e.lhs.sort != IOTA:
                raise SortError(f"equation {e} is not over iota", e.lhs)

    @property
    def arity(self) -> int:
        return self.main.arity


@dataclass(frozen=True)
class Propositional:
    """Output ``y`` related to inputs ``x1..xn`` by ``body``."""

    body: Prop
    arity: int
    output: Var = Var("y")

    def shape(self) -> Prop:
        return program_shape(self.arity, Exists(self.output, And(nat(self.output), self.body)))


@dataclass(frozen=True)
class Equational:
    spec: EquationalSpec
    guard: object = None

    @property
    def arity(self) -> int:
        return self.spec.arity

    def shape(self) -> Prop:
        y = Var("y")
        xs = tuple(Var(f"x{i}") for i in range(1, self.arity + 1))
        goal = Exists(y, And(nat(y), eq(y, Apply(self.spec.main, xs))))
        return program_shape(self.arity, goal)


ProgramSpec = Union[Propositional, Equational]


class GuardViolation(Exception):
    def __init__(self, report: ViolationFound):
        super().__init__(f"0 is congruent to {report.term}")
        self.report = report


class RunError(Exception):
    pass


class ProgramFuelExhausted(RunError):
    pass


class OutputShapeMismatch(RunError):
    pass


class DecodeFailure(RunError):
    pass


@dataclass(frozen=True, eq=False)
class Assembled:
    system: RewriteSystem
    guard: NoneFoundUpToDepth


def assemble_theory(
    ha: HATheory, e: Optional[EquationalSpec] = None, lim: Limits = Limits()
) -> Assembled:
    """HA extended with the equations of ``e``; refuses when ``0`` meets a successor."""
    if e is None:
        return Assembled(ha.system, guard_zero_succ(ha.system, lim))
    sig = ha.signature.copy()
    for f in (e.main,) + e.auxiliaries:
        sig.add_function(f)
    for eqn in e.equations:
        check_sorting(sig, eqn.lhs)
        check_sorting(sig, eqn.rhs)
    R = replace(ha.system.extend(equations=e.equations), signature=sig)
    report = guard_zero_succ(R, lim)
    if isinstance(report, ViolationFound):
        raise GuardViolation(report)
    return Assembled(R, report)


@dataclass(frozen=True)
class RunReport:
    inputs: tuple[int, ...]
    output: int
    witness: Term
    rewrite_steps: int = 0
    reduction_steps: int = 0
    result: P.ProofTerm = field(default=None, repr=False, compare=False)


def program_application(proof: P.ProofTerm, inputs: Sequence[int]) -> P.ProofTerm:
    """``proof @! p1 @ rho_p1 @! p2 @ rho_p2 ...``"""
    for p in inputs:
        proof = P.App(P.TApp(proof, numeral(p)), parigot(p))
    return proof


class _TermNormalizer:
    """Normalizes every term inside a proof, sharing work across a DAG."""

    def __init__(self, R: RewriteSystem, lim: Limits):
        self.R = R
        self.lim = lim
        self.steps = 0
        self.memo: dict = {}
        self.terms: dict = {}

    def term(self, t: Term) -> Term:
        if numeral_value(t) is not None:
            return t
        hit = self.terms.get(t)
        if hit is not None:
            return hit
        r = normalize_term(self.R, t, self.lim)
        if not r.normal:
            raise ProgramFuelExhausted(f"term {t} did not normalize")
        self.steps += r.steps
        self.terms[t] = r.value
        return r.value

    def proof(self, p: P.ProofTerm) -> P.ProofTerm:
        hit = self.memo.get(id(p))
        if hit is not None:
            return hit[1]
        out = self._go(p)
        self.memo[id(p)] = (p, out)
        return out

    def _go(self, p):
        if isinstance(p, P.TApp):
            inner = self.proof(p.proof)
            t = self.term(p.term)
            return p if inner is p.proof and t is p.term else P.TApp(inner, t)
        if isinstance(p, P.Pack):
            inner = self.proof(p.proof)
            t = self.term(p.witness)
            return p if inner is p.proof and t is p.witness else P.Pack(t, inner, p.ann)
        out = p
        for i, k in enumerate(p._kids):
            nk = self.proof(k)
            if nk is not k:
                out = P._rebuild(out, i, nk)
        return out


def run_program(
    R: RewriteSystem,
    proof: P.ProofTerm,
    inputs: Sequence[int],
    lim: Limits = Limits(),
) -> RunReport:
    """Apply ``proof`` to numerals and Parigot numerals, normalize, decode.

    The normal form must be ``pack(t, sigma)`` or ``pack(t, <sigma, tau>)``
    with ``sigma`` a Parigot numeral ``rho_q``; ``t`` must be congruent to ``q``.
    """
    inputs = tuple(inputs)
    res = P.evaluate(program_application(proof, inputs), lim.fuel)
    if not res.normal:
        raise ProgramFuelExhausted(f"no normal form within {lim.fuel} reduction steps")
    nf = res.value
    if not isinstance(nf, P.Pack):
        raise OutputShapeMismatch(f"normal form is not a pack: {type(nf).__name__}")
    sigma = nf.proof
    if isinstance(sigma, P.Pair):
        sigma = sigma.left
    tn = _TermNormalizer(R, lim)
    sigma = tn.proof(sigma)
    try:
        q = decode_numeral(sigma)
    except ValueError as e:
        raise DecodeFailure(str(e)) from e
    witness = tn.term(nf.witness)
    if not isinstance(decide_congruence(R, witness, numeral(q), lim), Equivalent):
        raise DecodeFailure(f"witness {witness} is not congruent to {q}")
    return RunReport(inputs, q, witness, tn.steps, res.steps, nf)


def project_witness(
    proof: P.ProofTerm, arity: int, source: Optional[Prop] = None
) -> P.ProofTerm:
    """Drop the correctness part of a program proof.

    ``proof`` proves ``forall x1, N(x1) => ... exists y, N(y) /\\ A``; the result
    proves the plain shape.  The existential is opened and the first
    component of its body repacked:
    ``fun! x1 => fun a1 => ... unpack(g @! x1 @ a1 ...; y b. pack(y, fst b))``
    with ``g`` bound to ``proof``.  Passing ``source`` (the proposition that
    ``proof`` proves) annotates that binding so the result can be checked.
    """
    g = "g"
    y = Var("y")
    body: P.ProofTerm = P.ProofVar(g)
    for i in range(1, arity + 1):
        body = P.App(P.TApp(body, Var(f"x{i}")), P.ProofVar(f"a{i}"))
    inner = P.Unpack(body, y, "b", P.Pack(y, P.Fst(P.ProofVar("b"))))
    if source is None:
        out = P.subst_proof(inner, g, proof)
    else:
        out = P.App(P.ImpIntro(g, source, inner), proof)
    for i in range(arity, 0, -1):
        out = P.AllIntro(Var(f"x{i}"), P.ImpIntro(f"a{i}", None, out))
    return out


@dataclass(frozen=True)
class Verified:
    pass


@dataclass(frozen=True)
class Unverified:
    note: str


def verify_output(
    R: RewriteSystem,
    spec: ProgramSpec,
    inputs: Sequence[int],
    q: int,
    lim: Limits = Limits(),
):
    """For equational specs, decide ``q = F(p1, ..., pn)`` in the congruence."""
    if isinstance(spec, Propositional):
        return Unverified("propositional specifications would need proof search")
    rhs = Apply(spec.spec.main, tuple(numeral(p) for p in inputs))
    v = decide_congruence(R, numeral(q), rhs, lim)
    if isinstance(v, Equivalent):
        return Verified()
    return Unverified(f"{q} = {rhs} is not established: {v}")
