import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dedmod import proofterm as P
from dedmod.arith import nat, numeral, parigot, zero
from dedmod.checker import (
    Context,
    Invalid,
    ShapeMismatch,
    ShapeOk,
    Undecided,
    Valid,
    check,
    check_closed_program_shape,
    synthesize,
)
from dedmod.parser import parse_proof, parse_prop, parse_theory
from dedmod.rewrite import localized_step
from dedmod.syntax import BOT, KAPPA, TOP, And, Implies, Apply, ComprehensionSymbol, Exists, Var, alpha_eq
from strategies import props

from conftest import load

x, y = Var("x"), Var("y")
a, b = P.ProofVar("a"), P.ProofVar("b")
EMPTY = Context()


def test_demo_evenness(demo):
    sig = load("demo.dmt").signature
    target = parse_prop("exists x:iota, 2 * x = 4", sig)
    assert check(demo, EMPTY, P.Pack(numeral(2), P.I), target) == Valid()


def test_leibniz_reflexivity(HA):
    sig = load("ha.dmt").signature
    proof = parse_proof("fun! X : kappa => fun a => a", sig)
    assert check(HA, EMPTY, proof, parse_prop("2 * 2 = 4", sig)) == Valid()


def test_axiom(HA):
    A = nat(x)
    assert check(HA, Context.of({"a": A}, {"x": x.sort}), a, A) == Valid()


def test_top_intro_against_false(HA):
    r = check(HA, EMPTY, P.I, parse_prop("Null(S(0))", load("ha.dmt").signature))
    assert isinstance(r, Invalid) and r.path == ()


def test_invalid_reports_path(HA):
    r = check(HA, EMPTY, P.Pair(P.I, P.I), And(TOP, BOT))
    assert isinstance(r, Invalid) and r.path == ("right",)


def test_unbound_proof_variable(HA):
    r = check(HA, EMPTY, a, TOP)
    assert isinstance(r, Invalid) and "unbound" in r.reason


def test_forall_intro_freshness(HA):
    # x occurs free in the hypothesis, so generalizing over it must fail
    ctx = Context.of({"a": nat(x)}, {"x": x.sort})
    r = check(HA, ctx, P.AllIntro(x, a), parse_prop("forall x:iota, N(x)", load("ha.dmt").signature))
    assert isinstance(r, Invalid)


def test_exists_elim_freshness(HA):
    ctx = Context.of({"b": Exists(x, nat(x))}, {"x": x.sort})
    r = check(HA, ctx, P.Unpack(b, x, "a", a), nat(x))
    assert isinstance(r, Invalid)


def test_exists_elim_with_escape_in_synthesis(HA):
    ctx = Context.of({"b": Exists(x, nat(x))})
    r = synthesize(HA, ctx, P.Unpack(b, x, "a", a))
    assert isinstance(r, Invalid) and "freshness" in r.reason


def test_sort_mismatch_in_instantiation(HA):
    ctx = Context.of({"a": parse_prop("forall x:iota, N(x)", load("ha.dmt").signature)},
                     {"X": KAPPA})
    r = check(HA, ctx, P.TApp(a, Var("X", KAPPA)), TOP)
    assert isinstance(r, Invalid) and "sort" in r.reason


def test_undecided_under_unoriented_equations():
    th = parse_theory("prelude HA\neq F(x) = G(x) orient none")
    r = check(th.system, EMPTY, P.I, parse_prop("Null(F(0))", th.signature))
    assert isinstance(r, Undecided)


# -- synthesis --------------------------------------------------------------


def test_synthesize_class_instance(HA):
    z = Var("z")
    C = Apply(ComprehensionSymbol((z,), (), nat(z)), ())
    got = synthesize(HA, Context.of({"a": nat(zero())}), P.TApp(a, C))
    sig = load("ha.dmt").signature
    want = parse_prop(
        "eps(0, {z | | N(z)}) => (forall y:iota, N(y) => eps(y, {z | | N(z)}) => eps(S(y), {z | | N(z)}))"
        " => eps(0, {z | | N(z)})",
        sig,
    )
    assert alpha_eq(got, want)


def test_synthesize_projection(HA):
    A, B = nat(x), nat(y)
    assert synthesize(HA, Context.of({"a": And(A, B)}), P.Fst(a)) == A


def test_synthesize_needs_annotation(HA):
    r = synthesize(HA, EMPTY, P.ImpIntro("a", None, a))
    assert isinstance(r, Invalid) and "annotation required" in r.reason


def test_synthesize_annotated_lambda(HA):
    assert synthesize(HA, EMPTY, P.ImpIntro("a", TOP, a)) == Implies(TOP, TOP)


# -- program shapes -------------------------------------------------------------


def test_addition_has_program_shape(HA, arith_items):
    _, items = arith_items
    assert check_closed_program_shape(HA, items["add"].proof, 2) == ShapeOk()


def test_numeral_is_not_a_program(HA):
    r = check_closed_program_shape(HA, parigot(3), 0)
    assert isinstance(r, ShapeMismatch) and isinstance(r.result, Invalid)


def test_packed_zero_is_a_program(HA):
    assert check_closed_program_shape(HA, P.Pack(zero(), parigot(0)), 0) == ShapeOk()


# -- properties ------------------------------------------------------------------


def _corpus():
    out = []
    for th_name, pf in [("ha.dmt", "arith.dmp"), ("ha_even.dmt", "even.dmp"),
                        ("demo.dmt", "demo.dmp"), ("loop.dmt", "loop.dmp"),
                        ("ha.dmt", "cuts.dmp")]:
        th, items = load(th_name, pf)
        names = list(items)
        for i, n in enumerate(names):
            ctx = Context(tuple((m, items[m].statement) for m in names[:i]))
            out.append(pytest.param(th, ctx, items[n], id=f"{pf}:{n}"))
    return out


@pytest.mark.parametrize("th, ctx, item", _corpus())
def test_corpus_is_valid(th, ctx, item):
    assert check(th.system, ctx, item.proof, item.statement) == Valid()


@settings(max_examples=15, deadline=None)
@given(st.lists(props, max_size=3))
def test_weakening(arith_items, extra):
    th, items = arith_items
    item = items["add"]
    ctx = Context(tuple((f"w{i}", p) for i, p in enumerate(extra)))
    assert check(th.system, ctx, item.proof, item.statement) == Valid()


@pytest.mark.parametrize("th, ctx, item", _corpus())
def test_congruent_targets_agree(th, ctx, item):
    for st_ in localized_step(th.system, item.statement)[:4]:
        assert check(th.system, ctx, item.proof, st_.result) == Valid()


def _reduction_closure(p, limit=200):
    seen, todo, out = set(), [p], []
    key_of = P.alpha_keyer()
    while todo and len(out) < limit:
        q = todo.pop()
        key = key_of(q)
        if key in seen:
            continue
        seen.add(key)
        out.append(q)
        todo.extend(r for _, r in P.redexes(q))
    return out


@pytest.mark.parametrize("th, ctx, item", _corpus())
def test_subject_reduction(th, ctx, item):
    for q in _reduction_closure(item.proof)[1:]:
        assert check(th.system, ctx, q, item.statement) == Valid()


def test_cut_corpus_has_every_redex_kind():
    th, items = load("ha.dmt", "cuts.dmp")
    kinds = set()
    for it in items.values():
        for q in _reduction_closure(it.proof):
            for path, _ in P.redexes(q):
                node = q
                for i in path:
                    node = node._kids[i]
                kind = type(node).__name__
                if kind == "Case":
                    kind += type(node.scrutinee).__name__
                kinds.add(kind)
    assert kinds == {"Fst", "Snd", "CaseInl", "CaseInr", "App", "TApp", "Unpack"}
