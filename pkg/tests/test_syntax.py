import pytest
from hypothesis import given
from hypothesis import strategies as st

from dedmod.arith import EPS, NAT, SUCC, eps, eq, ha_signature, nat, plus, succ, zero
from dedmod.syntax import (
    IOTA,
    KAPPA,
    Apply,
    Atom,
    ComprehensionSymbol,
    Exists,
    Forall,
    SortError,
    Var,
    alpha_eq,
    apply_subst,
    check_sorting,
    compose,
    free_vars,
    kappa,
    positions,
    replace_at,
    subterm_at,
)
from strategies import X, Y, props, terms

Z = Var("z")
CX = Var("X", KAPPA)


def test_free_vars_drops_bound():
    assert free_vars(Forall(X, eps(X, CX))) == {CX}


def test_free_vars_of_sum():
    assert free_vars(plus(succ(X), Y)) == {X, Y}


def test_closed_atom_has_no_free_vars():
    assert free_vars(nat(zero())) == frozenset()


def test_subst_replaces_free_occurrence():
    got = apply_subst({X: zero()}, plus(succ(X), Y))
    assert got == plus(succ(zero()), Y)


def test_subst_avoids_capture():
    got = apply_subst({X: Y}, Forall(Y, eq(X, Y)))
    assert isinstance(got, Forall)
    assert got.var.name != "y"
    assert alpha_eq(got, Forall(Var("w"), eq(Y, Var("w"))))


def test_subst_into_atom():
    n = Var("n")
    assert apply_subst({n: succ(zero())}, nat(n)) == nat(succ(zero()))


def test_subst_rejects_sort_mismatch():
    with pytest.raises(SortError):
        apply_subst({X: CX}, nat(X))


def test_alpha_eq_renamed_binder():
    assert alpha_eq(Forall(X, nat(X)), Forall(Y, nat(Y)))


def test_alpha_eq_sees_vacuous_binder():
    assert not alpha_eq(Forall(X, nat(X)), Forall(X, nat(zero())))


def test_alpha_eq_comprehension_identity():
    w = Var("w")
    a = eps(X, Apply(ComprehensionSymbol((Z,), (), nat(Z)), ()))
    b = eps(X, Apply(ComprehensionSymbol((w,), (), nat(w)), ()))
    assert alpha_eq(a, b)


def test_comprehension_rank():
    c = ComprehensionSymbol((Z, Var("u")), (Y,), eq(Z, Y))
    assert c.result == kappa(2)
    assert c.args == (IOTA,)


def test_comprehension_rejects_stray_variables():
    with pytest.raises(SortError):
        ComprehensionSymbol((Z,), (), eq(Z, Y))


def test_sorting_accepts_numeral():
    check_sorting(ha_signature(), succ(zero()))


def test_sorting_rejects_class_argument_to_successor():
    with pytest.raises(SortError, match="sort mismatch"):
        check_sorting(ha_signature(), Apply(SUCC, (CX,)))


def test_sorting_rejects_iota_class_position():
    with pytest.raises(SortError):
        check_sorting(ha_signature(), Atom(EPS, (zero(), X)))


def test_sorting_reports_unknown_symbol():
    from dedmod.syntax import FunctionSymbol

    g = FunctionSymbol("g", (IOTA,), IOTA)
    with pytest.raises(SortError, match="unknown function symbol g") as info:
        check_sorting(ha_signature(), succ(Apply(g, (zero(),))))
    assert info.value.subterm == Apply(g, (zero(),))


def test_sorting_reports_arity():
    with pytest.raises(SortError, match="arity"):
        check_sorting(ha_signature(), Atom(NAT, (zero(), zero())))


def test_positions_and_replace():
    t = plus(succ(X), Y)
    assert subterm_at(t, (0, 0)) == X
    assert replace_at(t, (0, 0), zero()) == plus(succ(zero()), Y)
    assert [p for p, _ in positions(t)] == [(), (0,), (0, 0), (1,)]


@given(props)
def test_identity_substitution(p):
    assert alpha_eq(apply_subst({X: X, Y: Y}, p), p)


@given(props, terms, terms)
def test_composition(p, t, u):
    s1, s2 = {X: t}, {Y: u}
    direct = apply_subst(s1, apply_subst(s2, p))
    assert alpha_eq(direct, apply_subst(compose(s1, s2), p))


@given(props, terms)
def test_free_vars_after_subst(p, t):
    got = free_vars(apply_subst({X: t}, p))
    assert got <= (free_vars(p) - {X}) | free_vars(t)


@given(props)
def test_alpha_eq_reflexive_and_renaming(p):
    assert alpha_eq(p, p)
    q = Exists(Var("fresh"), p)
    r = Exists(Var("other"), p)
    assert alpha_eq(q, r)


@given(props, st.sampled_from([X, Y]))
def test_renaming_bound_variable_preserves_alpha(p, v):
    w = Var("w9")
    assert alpha_eq(Forall(v, p), Forall(w, apply_subst({v: w}, p)))
