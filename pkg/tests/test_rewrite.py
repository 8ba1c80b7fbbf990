
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dedmod.arith import PRED, nat, nat_unfolding, numeral, plus, succ, zero, eps, NULL
from dedmod.parser import parse_prop, parse_term, parse_theory
from dedmod.rewrite import (
    CounterexampleSuspect,
    Distinct,
    Equivalent,
    Exposed,
    Limits,
    NoneFoundUpToDepth,
    NonConfusionOk,
    RewriteSystem,
    StillAtomic,
    TermRule,
    Undecided,
    ViolationFound,
    critical_pairs,
    decide_congruence,
    guard_zero_succ,
    head_expose,
    joinable,
    localized_step,
    match_atom,
    non_confusion_check,
    normalize_prop,
    normalize_term,
    unjoined_peaks,
)
from dedmod.results import FuelExhausted, Normal
from dedmod.syntax import (
    IOTA,
    KAPPA,
    TOP,
    And,
    Apply,
    Atom,
    FunctionSymbol,
    Implies,
    Var,
    alpha_eq,
    apply_subst,
    canonical,
)
from strategies import X, Y, closed_terms, props

from conftest import load


def value(t):
    """Independent arithmetic oracle for closed terms."""
    name = t.symbol.name
    if name == "0":
        return 0
    if name == "S":
        return value(t.args[0]) + 1
    if name == "Pred":
        return max(value(t.args[0]) - 1, 0)
    a, b = (value(x) for x in t.args)
    return a + b if name == "plus" else a * b


def theory(text):
    return parse_theory(text)


# -- normalize_term -------------------------------------------------------


def test_addition_normal_form(HA):
    r = normalize_term(HA, plus(numeral(2), numeral(2)))
    assert isinstance(r, Normal) and r.value == numeral(4)


def test_pred_of_successor(HA):
    assert normalize_term(HA, Apply(PRED, (succ(X),))).value == X


def test_variable_is_normal(HA):
    r = normalize_term(HA, X)
    assert r.normal and r.value == X and r.steps == 0


def test_partial_equation_runs_out_of_fuel():
    th = theory("prelude HA\neq F(0) = S(F(0))")
    F0 = parse_term("F(0)", th.signature)
    r = normalize_term(th.system, F0, Limits(fuel=5))
    assert isinstance(r, FuelExhausted)
    assert str(r.value) == "S(S(S(S(S(F(0))))))"


@given(closed_terms)
def test_closed_terms_match_oracle(HA, t):
    r = normalize_term(HA, t)
    assert r.normal and r.value == numeral(value(t))


@given(closed_terms)
def test_normal_form_is_fixpoint(HA, t):
    once = normalize_term(HA, t).value
    again = normalize_term(HA, once, Limits(fuel=1))
    assert again.normal and again.value == once and again.steps == 0


# -- normalize_prop ---------------------------------------------------------


def test_leibniz_normal_form(HA):
    r = normalize_prop(HA, parse_prop("2 * 2 = 4", load("ha.dmt").signature))
    want = parse_prop("forall X:kappa, eps(4, X) => eps(4, X)", load("ha.dmt").signature)
    assert r.normal and alpha_eq(r.value, want)


def test_null_zero_is_top(HA):
    assert normalize_prop(HA, Atom(NULL, (zero(),))).value == TOP


def test_top_is_normal(HA):
    r = normalize_prop(HA, TOP)
    assert r.normal and r.value == TOP


def test_nat_does_not_normalize(HA):
    r = normalize_prop(HA, nat(zero()), Limits(fuel=50))
    assert isinstance(r, FuelExhausted) and r.steps == 50


def test_prop_trace_replays(HA):
    from dedmod.rewrite import apply_step

    A = parse_prop("Null(Pred(S(0))) /\\ 2 * 1 = 2", load("ha.dmt").signature)
    r = normalize_prop(HA, A, trace=True)
    x = A
    for s in r.trace:
        x = apply_step(x, s)
    assert alpha_eq(x, r.value)


# -- head_expose --------------------------------------------------------------


def test_expose_nat_zero(HA):
    r = head_expose(HA, nat(zero()))
    assert isinstance(r, Exposed) and alpha_eq(r.value, nat_unfolding(zero()))


def test_membership_in_variable_class_is_stuck(HA):
    r = head_expose(HA, eps(zero(), Var("X", KAPPA)))
    assert isinstance(r, StillAtomic)


def test_compound_is_already_exposed(HA):
    A = And(nat(X), nat(Y))
    assert head_expose(HA, A).value is A


def test_expose_detects_cycles():
    th = theory("pred P\npred Q\nprop-rule P --> Q\nprop-rule Q --> P")
    r = head_expose(th.system, parse_prop("P", th.signature))
    assert isinstance(r, FuelExhausted)


# -- decide_congruence ------------------------------------------------------


def test_demo_two_plus_two_is_top(demo):
    sig = load("demo.dmt").signature
    v = decide_congruence(demo, parse_prop("2 + 2 = 4", sig), TOP)
    assert isinstance(v, Equivalent)


def test_nat_zero_and_one_are_distinct(HA):
    assert isinstance(decide_congruence(HA, nat(zero()), nat(numeral(1))), Distinct)


@given(props)
def test_congruence_reflexive(HA, p):
    assert isinstance(decide_congruence(HA, p, p), Equivalent)


@given(closed_terms)
def test_equivalent_traces_replay(HA, t):
    n = numeral(value(t))
    v = decide_congruence(HA, t, n)
    assert isinstance(v, Equivalent)
    assert v.replay(t, n)


def test_lazy_comparison_of_nat_atoms(HA):
    # N never normalizes, yet equal arguments decide the atoms
    v = decide_congruence(HA, nat(plus(numeral(1), numeral(1))), nat(numeral(2)))
    assert isinstance(v, Equivalent)
    assert v.replay(nat(plus(numeral(1), numeral(1))), nat(numeral(2)))


def test_unoriented_equations_give_undecided_not_distinct():
    th = theory("prelude HA\neq F(x) = G(x) orient none")
    sig = th.signature
    v = decide_congruence(th.system, parse_term("F(0)", sig), parse_term("S(0)", sig))
    assert isinstance(v, Undecided)


def test_unoriented_equation_joins_by_search():
    th = theory("prelude HA\neq F(S(x)) = G(x) orient none")
    sig = th.signature
    v = decide_congruence(th.system, parse_term("F(1 + 0)", sig), parse_term("G(0)", sig))
    assert isinstance(v, Equivalent)


def test_self_loop_equation_is_pruned():
    th = theory("prelude HA\neq F(0) = F(0) orient none")
    sig = th.signature
    a = parse_term("F(0)", sig)
    assert isinstance(decide_congruence(th.system, a, a), Equivalent)
    assert not isinstance(decide_congruence(th.system, a, numeral(0)), Equivalent)


# -- localized_step -----------------------------------------------------------


def test_localized_step_normalizes_arguments(HA):
    A = Atom(NULL, (Apply(PRED, (numeral(1),)),))
    steps = localized_step(HA, A)
    assert len(steps) == 1
    assert steps[0].occurrence == () and steps[0].result == TOP


def test_localized_step_without_atoms(HA):
    assert localized_step(HA, TOP) == []


def test_localized_step_two_occurrences(HA):
    steps = localized_step(HA, And(nat(zero()), Atom(NULL, (zero(),))))
    assert sorted(s.occurrence for s in steps) == [(0,), (1,)]


def _naive_successors(R, A):
    """Rewrite-anywhere oracle: walk the proposition, normalize atom arguments
    by term rules, then try every proposition rule syntactically."""
    out = []

    def walk(p, rebuild):
        if isinstance(p, Atom):
            args = tuple(normalize_term(R, a).value for a in p.args)
            atom = Atom(p.pred, args)
            rules = list(R.prop_rules)
            from dedmod.rewrite import prop_rules_matching

            rules += [r for r, _ in prop_rules_matching(R, atom) if r not in rules]
            for r in rules:
                s = match_atom(r.lhs, atom)
                if s is not None:
                    out.append(rebuild(apply_subst(s, r.rhs)))
        elif hasattr(p, "left"):
            walk(p.left, lambda x: rebuild(type(p)(x, p.right)))
            walk(p.right, lambda x: rebuild(type(p)(p.left, x)))
        elif hasattr(p, "body"):
            walk(p.body, lambda x: rebuild(type(p)(p.var, x)))

    walk(A, lambda x: x)
    return out


@settings(max_examples=60)
@given(props)
def test_localized_step_agrees_with_naive_rewriting(HA, p):
    got = sorted(map(repr, map(canonical, (s.result for s in localized_step(HA, p)))))
    want = sorted(map(repr, map(canonical, _naive_successors(HA, p))))
    assert got == want


# -- critical pairs, joinability -----------------------------------------------


def test_ha_term_rules_have_no_critical_pairs(HA):
    assert critical_pairs(HA.term_rules) == []


def test_textbook_overlap():
    f = FunctionSymbol("f", (IOTA,), IOTA)
    g = FunctionSymbol("g", (IOTA,), IOTA)
    r1 = TermRule(Apply(f, (Apply(g, (X,)),)), X)
    r2 = TermRule(Apply(g, (zero(),)), zero())
    pairs = critical_pairs([r1, r2])
    assert len(pairs) == 1
    cp = pairs[0]
    assert cp.peak == Apply(f, (Apply(g, (zero(),)),))
    assert {str(cp.left), str(cp.right)} == {"0", "f(0)"}


def test_single_rule_has_no_self_overlap():
    assert critical_pairs([TermRule(plus(zero(), Y), Y)]) == []


_PATTERNS = [zero(), succ(zero()), succ(succ(X))]


@given(st.lists(st.sampled_from(range(3)), unique=True, min_size=1), st.data())
def test_orthogonal_systems_have_joinable_pairs(HA, picks, data):
    g = FunctionSymbol("g", (IOTA,), IOTA)
    rules = []
    for i in picks:
        pat = _PATTERNS[i]
        rhs = data.draw(st.sampled_from([zero(), pat] + list(pat.free_vars)))
        rules.append(TermRule(Apply(g, (pat,)), rhs))
    R = RewriteSystem(term_rules=tuple(rules))
    for cp in critical_pairs(rules):
        assert joinable(R, cp.left, cp.right) is True


def test_joinable_examples(HA):
    assert joinable(HA, Apply(PRED, (numeral(1),)), plus(zero(), zero())) is True
    assert joinable(HA, zero(), numeral(1)) is False
    th = theory("prelude HA\neq F(0) = S(F(0))")
    F0 = parse_term("F(0)", th.signature)
    assert joinable(th.system, F0, zero(), Limits(fuel=20)) is None


# -- guard ---------------------------------------------------------------------


def test_guard_catches_zero_equals_one():
    r = guard_zero_succ(load("ha_bad.dmt").system)
    assert isinstance(r, ViolationFound) and r.term == numeral(1)


def test_guard_strips_common_successors():
    th = theory("prelude HA\neq S(0) = S(S(F(0))) orient none")
    r = guard_zero_succ(th.system)
    assert isinstance(r, ViolationFound)
    assert str(r.term) == "S(F(0))"


def _oracle_reachable(depth):
    """Plain BFS over nested tuples with the parity equations read both ways."""

    def subterms(t, path=()):
        yield path, t
        if isinstance(t, tuple):
            for i, a in enumerate(t[1:], 1):
                yield from subterms(a, path + (i,))

    def put(t, path, new):
        if not path:
            return new
        i = path[0]
        return t[:i] + (put(t[i], path[1:], new),) + t[i + 1:]

    def rewrites(t):
        # F(0) = S(0), F(S(0)) = 0, F(S(S(x))) = F(x), plus Pred and arithmetic
        # rules applied forwards; only what can fire on terms built from 0, S, F
        for path, u in subterms(t):
            if u == ("F", "0"):
                yield put(t, path, ("S", "0"))
            if u == ("S", "0"):
                yield put(t, path, ("F", "0"))
            if u == ("F", ("S", "0")):
                yield put(t, path, "0")
            if u == "0":
                yield put(t, path, ("F", ("S", "0")))
            if isinstance(u, tuple) and u[0] == "F":
                a = u[1]
                if isinstance(a, tuple) and a[0] == "S" and isinstance(a[1], tuple) and a[1][0] == "S":
                    yield put(t, path, ("F", a[1][1]))
                yield put(t, path, ("F", ("S", ("S", a))))

    seen = {"0"}
    frontier = ["0"]
    for _ in range(depth):
        nxt = []
        for t in frontier:
            for u in rewrites(t):
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    return seen


def test_guard_parity_equations_to_depth_five(even):
    th, _ = even
    r = guard_zero_succ(th.system, Limits(depth=5))
    assert isinstance(r, NoneFoundUpToDepth) and r.depth == 5
    oracle = _oracle_reachable(5)
    assert not any(isinstance(t, tuple) and t[0] == "S" for t in oracle)


# -- non-confusion and strong confluence -------------------------------------


def test_non_confusion_on_nat_unfolding(HA):
    r = non_confusion_check(HA, nat(zero()), nat_unfolding(zero()))
    assert isinstance(r, NonConfusionOk)


def test_non_confusion_stable_rule():
    th = load("stable.dmt")
    sig = th.signature
    P, Q = parse_prop("P", sig), parse_prop("Q", sig)
    r = non_confusion_check(th.system, P, Implies(Q, Implies(Q, P)))
    assert isinstance(r, NonConfusionOk)


def test_non_confusion_suspects_zero_equals_one():
    th = theory("prelude HA\neq 0 = S(0) orient none")
    sig = th.signature
    A, B = parse_prop("Null(0)", sig), parse_prop("Null(S(0))", sig)
    r = non_confusion_check(th.system, A, B)
    assert isinstance(r, CounterexampleSuspect)


def test_non_confusion_requires_congruent_inputs(HA):
    with pytest.raises(ValueError):
        non_confusion_check(HA, nat(zero()), nat(numeral(1)))


@settings(max_examples=40, deadline=None)
@given(props)
def test_strong_confluence_parity_theory(even, p):
    th, _ = even
    assert unjoined_peaks(th.system, p) == []
