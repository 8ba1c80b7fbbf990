"""Hypothesis strategies over the arithmetic signature."""

from hypothesis import strategies as st

from dedmod import proofterm as P
from dedmod.arith import PRED, eq, nat, plus, succ, times, zero, NULL
from dedmod.syntax import And, Apply, Atom, Exists, Forall, Implies, Or, Var, BOT, TOP

X, Y = Var("x"), Var("y")

closed_terms = st.recursive(
    st.just(zero()),
    lambda sub: st.one_of(
        sub.map(succ),
        sub.map(lambda t: Apply(PRED, (t,))),
        st.tuples(sub, sub).map(lambda p: plus(*p)),
        st.tuples(sub, sub).map(lambda p: times(*p)),
    ),
    max_leaves=6,
)

terms = st.recursive(
    st.sampled_from([zero(), X, Y]),
    lambda sub: st.one_of(
        sub.map(succ),
        sub.map(lambda t: Apply(PRED, (t,))),
        st.tuples(sub, sub).map(lambda p: plus(*p)),
        st.tuples(sub, sub).map(lambda p: times(*p)),
    ),
    max_leaves=5,
)

atoms = st.one_of(
    terms.map(nat),
    terms.map(lambda t: Atom(NULL, (t,))),
    st.tuples(terms, terms).map(lambda p: eq(*p)),
)

props = st.recursive(
    st.one_of(atoms, st.just(TOP), st.just(BOT)),
    lambda sub: st.one_of(
        st.tuples(sub, sub).map(lambda p: And(*p)),
        st.tuples(sub, sub).map(lambda p: Or(*p)),
        st.tuples(sub, sub).map(lambda p: Implies(*p)),
        st.tuples(st.sampled_from([X, Y]), sub).map(lambda p: Forall(*p)),
        st.tuples(st.sampled_from([X, Y]), sub).map(lambda p: Exists(*p)),
    ),
    max_leaves=5,
)

small_numbers = st.integers(min_value=0, max_value=6)


def _proofs(names=("a", "b")):
    leaves = st.one_of(st.sampled_from([P.ProofVar(n) for n in names]), st.just(P.I))
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.tuples(sub, sub).map(lambda p: P.Pair(*p)),
            sub.map(P.Fst),
            sub.map(P.Snd),
            sub.map(lambda p: P.Inl(p, None)),
            sub.map(lambda p: P.Inr(p, None)),
            st.tuples(sub, sub, sub).map(lambda p: P.Case(p[0], "a", p[1], "b", p[2])),
            st.tuples(st.sampled_from(list(names)), sub).map(lambda p: P.ImpIntro(p[0], None, p[1])),
            st.tuples(sub, sub).map(lambda p: P.App(*p)),
            sub.map(lambda p: P.AllIntro(X, p)),
            st.tuples(sub, terms).map(lambda p: P.TApp(*p)),
            st.tuples(terms, sub).map(lambda p: P.Pack(p[0], p[1], None)),
            st.tuples(sub, sub).map(lambda p: P.Unpack(p[0], X, "a", p[1])),
        ),
        max_leaves=8,
    )


proofs = _proofs()
