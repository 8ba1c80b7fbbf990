import pytest
from hypothesis import given, settings

from dedmod import proofterm as P
from dedmod.arith import numeral, parigot, zero
from dedmod.proofterm import (
    I,
    App,
    AllIntro,
    Case,
    Fst,
    ImpIntro,
    Inl,
    Inr,
    Pack,
    Pair,
    ProofVar,
    Snd,
    TApp,
    Unpack,
    alpha_eq,
    check_uniformity,
    evaluate,
    is_neutral,
    normalize_proof,
    reduce_step,
    redexes,
    subst_proof,
    subst_term_in_proof,
)
from dedmod.results import FuelExhausted, Normal
from dedmod.syntax import Var
from strategies import X, proofs

a, b, c = ProofVar("a"), ProofVar("b"), ProofVar("c")
p1, p2, p3 = ProofVar("p1"), ProofVar("p2"), ProofVar("p3")


def lam(v, body):
    return ImpIntro(v, None, body)


# -- substitution -------------------------------------------------------------


def test_subst_variable_itself():
    assert subst_proof(a, "a", I) is I


def test_subst_avoids_capture():
    got = subst_proof(lam("b", a), "a", b)
    assert isinstance(got, ImpIntro) and got.var != "b"
    assert alpha_eq(got, lam("z", b))


def test_subst_inside_pair():
    got = subst_proof(Pair(a, I), "a", Fst(c))
    assert alpha_eq(got, Pair(Fst(c), I))


def test_term_subst_in_application():
    got = subst_term_in_proof(TApp(a, X), X, zero())
    assert alpha_eq(got, TApp(a, zero()))


def test_term_subst_respects_binder():
    p = AllIntro(X, TApp(a, X))
    assert alpha_eq(subst_term_in_proof(p, X, zero()), p)


def test_term_subst_in_witness():
    got = subst_term_in_proof(Pack(X, I), X, numeral(1))
    assert alpha_eq(got, Pack(numeral(1), I))


def test_term_subst_avoids_capture():
    y = Var("y")
    got = subst_term_in_proof(AllIntro(y, TApp(a, X)), X, y)
    assert isinstance(got, AllIntro) and got.var.name != "y"
    assert alpha_eq(got, AllIntro(Var("w"), TApp(a, y)))


@given(proofs)
def test_subst_of_absent_variable_is_identity(p):
    assert alpha_eq(subst_proof(p, "absent", I), p)


@given(proofs)
def test_subst_removes_free_variable(p):
    got = subst_proof(p, "a", I)
    assert "a" not in got.free_proof_vars


# -- the seven reduction rules -------------------------------------------------


def test_fst_of_pair():
    assert reduce_step(Fst(Pair(p1, p2))) is p1


def test_snd_of_pair():
    assert reduce_step(Snd(Pair(p1, p2))) is p2


def test_case_of_inl():
    got = reduce_step(Case(Inl(p1), "a", Pair(a, p2), "b", p3))
    assert alpha_eq(got, Pair(p1, p2))


def test_case_of_inr():
    got = reduce_step(Case(Inr(p1), "a", p2, "b", Pair(b, p3)))
    assert alpha_eq(got, Pair(p1, p3))


def test_beta():
    assert reduce_step(App(lam("a", a), I)) is I


def test_term_beta():
    got = reduce_step(TApp(AllIntro(X, TApp(p1, X)), zero()))
    assert alpha_eq(got, TApp(p1, zero()))


def test_unpack_of_pack():
    body = Pair(TApp(p2, X), a)
    got = reduce_step(Unpack(Pack(numeral(1), p1), X, "a", body))
    assert alpha_eq(got, Pair(TApp(p2, numeral(1)), p1))


def test_leftmost_outermost_order():
    inner = App(lam("a", a), p1)
    outer = Fst(Pair(inner, inner))
    assert reduce_step(outer) is inner


def test_normal_has_no_step():
    assert reduce_step(lam("a", a)) is None


# -- normalization --------------------------------------------------------------


def test_normalize_k_combinator():
    r = normalize_proof(App(App(lam("a", lam("b", a)), I), I))
    assert isinstance(r, Normal) and r.value is I and r.steps == 2


def test_numeral_is_already_normal():
    r = normalize_proof(parigot(2))
    assert r.normal and r.steps == 0 and r.value is parigot(2)


def test_self_application_runs_out():
    w = lam("a", App(a, a))
    r = normalize_proof(App(w, w), fuel=1000)
    assert isinstance(r, FuelExhausted) and r.steps == 1000


def test_evaluate_self_application_runs_out():
    w = lam("a", App(a, a))
    assert isinstance(evaluate(App(w, w), fuel=1000), FuelExhausted)


@pytest.mark.parametrize("n", range(21))
def test_numerals_are_normal(n):
    assert normalize_proof(parigot(n)).steps == 0


@settings(max_examples=200)
@given(proofs)
def test_evaluate_agrees_with_leftmost_outermost(p):
    slow = normalize_proof(p, fuel=200)
    fast = evaluate(p, fuel=2000)
    if slow.normal and fast.normal:
        assert alpha_eq(slow.value, fast.value)


@given(proofs)
def test_reduction_keeps_scope(p):
    for _, q in redexes(p):
        assert q.free_proof_vars <= p.free_proof_vars
        assert q.free_term_vars <= p.free_term_vars


def _at(p, path):
    for i in path:
        p = p._kids[i]
    return p


def _replace(p, path, new):
    if not path:
        return new
    return P._rebuild(p, path[0], _replace(p._kids[path[0]], path[1:], new))


@given(proofs)
def test_redexes_contract_in_place(p):
    for path, q in redexes(p):
        sub = _at(p, path)
        assert P._is_redex(sub)
        assert alpha_eq(q, _replace(p, path, P.contract(sub)))


def test_redexes_nested():
    inner = Fst(Pair(a, b))
    p = lam("c", Pair(inner, App(lam("a", a), c)))
    got = {path: q for path, q in redexes(p)}
    assert set(got) == {(0, 0), (0, 1)}
    assert alpha_eq(got[(0, 0)], lam("c", Pair(a, App(lam("a", a), c))))
    assert alpha_eq(got[(0, 1)], lam("c", Pair(inner, c)))


@given(proofs)
def test_reduce_step_is_one_of_the_redexes(p):
    q = reduce_step(p)
    reducts = [r for _, r in redexes(p)]
    assert (q is None) == (not reducts)
    if q is not None:
        assert alpha_eq(q, reducts[0])


# -- classifiers -----------------------------------------------------------------


@pytest.mark.parametrize(
    "p, neutral",
    [
        (Fst(a), True),
        (a, True),
        (App(a, b), True),
        (TApp(a, zero()), True),
        (Unpack(a, X, "b", b), True),
        (P.BotElim(a, None), True),
        (Case(a, "b", b, "c", c), True),
        (Snd(a), True),
        (I, False),
        (Pack(numeral(2), I), False),
        (Pair(a, b), False),
        (lam("a", a), False),
        (AllIntro(X, a), False),
        (Inl(a), False),
        (Inr(a), False),
    ],
)
def test_is_neutral(p, neutral):
    assert is_neutral(p) is neutral
    assert P.is_introduction(p) is not neutral


def test_uniformity_of_zero():
    assert check_uniformity(parigot(0))


def test_uniformity_of_evenness_witness():
    assert check_uniformity(Pack(numeral(2), I))


def test_uniformity_needs_closed_input():
    with pytest.raises(ValueError, match="closed"):
        check_uniformity(Fst(a))


def test_uniformity_needs_normal_input():
    with pytest.raises(ValueError, match="normal"):
        check_uniformity(Fst(Pair(I, I)))


def test_alpha_eq_on_proof_binders():
    assert alpha_eq(lam("a", a), lam("b", b))
    assert not alpha_eq(lam("a", b), lam("b", b))
    assert alpha_eq(Unpack(c, X, "a", TApp(a, X)), Unpack(c, Var("y"), "b", TApp(b, Var("y"))))
