import pytest
from hypothesis import given

from dedmod import proofterm as P
from dedmod.arith import build_HA, numeral
from dedmod.parser import ParseError, parse_proof, parse_proofs, parse_prop, parse_term, parse_theory, tokenize
from dedmod.printer import show_proof, show_prop, show_term
from dedmod.syntax import Exists, alpha_eq
from strategies import proofs, props, terms

from conftest import CORPUS, load

SIG = build_HA().signature


@given(terms)
def test_term_round_trip(t):
    assert parse_term(show_term(t), SIG) == t


@given(terms)
def test_compact_term_round_trip(t):
    assert parse_term(show_term(t, compact=True), SIG) == t


@given(props)
def test_prop_round_trip(p):
    assert alpha_eq(parse_prop(show_prop(p), SIG), p)


@given(proofs)
def test_proof_round_trip(p):
    assert P.alpha_eq(parse_proof(show_proof(p), SIG), p)


@pytest.mark.parametrize(
    "theory,proofs",
    [("ha.dmt", "arith.dmp"), ("ha_even.dmt", "even.dmp"), ("demo.dmt", "demo.dmp"),
     ("loop.dmt", "loop.dmp"), ("ha.dmt", "cuts.dmp")],
)
def test_corpus_round_trip(theory, proofs):
    th, items = load(theory, proofs)
    for it in items.values():
        text = f"proof {it.name} : {show_prop(it.statement)} := {show_proof(it.proof)}"
        (back,) = parse_proofs(text, th)
        assert alpha_eq(back.statement, it.statement)
        assert P.alpha_eq(back.proof, it.proof)


def test_every_corpus_file_parses():
    for f in sorted(CORPUS.glob("*.dmt")):
        parse_theory(f.read_text())


def test_missing_sort_position():
    with pytest.raises(ParseError) as e:
        parse_theory("fun S : -> iota")
    assert (e.value.line, e.value.col) == (1, 9)
    assert str(e.value).startswith("1:9:")


def test_error_on_second_line():
    with pytest.raises(ParseError) as e:
        parse_theory("sort iota\nrule x -->")
    assert e.value.line == 2


def test_unknown_symbol_is_a_diagnostic():
    with pytest.raises(ParseError):
        parse_prop("Q(0)", SIG, allow_free=False)


def test_prelude_with_equation():
    th = parse_theory("prelude HA\neq F(0) = S(0)")
    assert th.rule_count == 11
    assert len(th.equations) == 1
    assert th.signature.functions["F"].arity == 1


def test_prelude_must_come_first():
    with pytest.raises(ParseError):
        parse_theory("eq F(0) = 0\nprelude HA")


def test_pack_example():
    th, items = load("demo.dmt", "demo.dmp")
    two = items["two"]
    assert isinstance(two.statement, Exists)
    assert P.alpha_eq(two.proof, P.Pack(parse_term("2", th.signature), P.I))


def test_numerals_are_sugar():
    assert parse_term("3", SIG) == numeral(3)


def test_unicode_spellings():
    a = parse_prop("∀x:iota, N(x) ⇒ ⊤ ∧ ⊥", SIG)
    b = parse_prop("forall x:iota, N(x) => top /\\ bot", SIG)
    assert a == b


def test_comments_are_skipped():
    kinds = [t.kind for t in tokenize("# nothing here\nsort")]
    assert kinds[0] == "id"


def test_duplicate_proof_name():
    th = load("ha.dmt")
    with pytest.raises(ParseError):
        parse_proofs("proof a : top := I\nproof a : top := I", th)
