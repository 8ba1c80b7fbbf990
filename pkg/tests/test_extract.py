import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dedmod import proofterm as P
from dedmod.arith import build_HA, numeral, parigot, zero, succ
from dedmod.checker import Context, Valid, check
from dedmod.extract import (
    Equational,
    EquationalSpec,
    GuardViolation,
    OutputShapeMismatch,
    ProgramFuelExhausted,
    Propositional,
    Unverified,
    Verified,
    assemble_theory,
    program_application,
    project_witness,
    run_program,
    verify_output,
)
from dedmod.rewrite import Equation, Equivalent, Limits, NoneFoundUpToDepth, decide_congruence, normalize_term
from dedmod.syntax import BOT, TOP, Apply, FunctionSymbol, IOTA, Var

from conftest import even_spec, load, program


@pytest.fixture(scope="module")
def even_setup():
    th, items = load("ha_even.dmt", "even.dmp")
    return th, items, assemble_theory(build_HA(), even_spec(th))


def test_add(arith_items):
    th, items = arith_items
    assert run_program(th.system, program(items, "add"), (3, 4)).output == 7


def test_ident(arith_items):
    th, items = arith_items
    r = run_program(th.system, program(items, "ident"), (9,))
    assert r.output == 9 and r.witness == numeral(9)


@pytest.mark.parametrize("n,parity", [(0, 1), (3, 0), (4, 1), (7, 0)])
def test_even_char(even_setup, n, parity):
    th, items, asm = even_setup
    assert run_program(asm.system, program(items, "evenChar"), (n,)).output == parity


def test_run_is_deterministic(arith_items):
    th, items = arith_items
    a = run_program(th.system, program(items, "add"), (2, 5))
    b = run_program(th.system, program(items, "add"), (2, 5))
    assert a == b


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5))
def test_result_is_always_a_pack(p1, p2):
    th, items = load("ha.dmt", "arith.dmp")
    r = run_program(th.system, program(items, "add"), (p1, p2))
    assert isinstance(r.result, P.Pack)
    assert r.output == p1 + p2


def test_non_program_is_rejected(HA):
    with pytest.raises(OutputShapeMismatch):
        run_program(HA, P.AllIntro(Var("x"), P.ImpIntro("a", None, P.ProofVar("a"))), (2,))


def test_fuel_is_reported(arith_items):
    th, items = arith_items
    with pytest.raises(ProgramFuelExhausted):
        run_program(th.system, program(items, "add"), (3, 3), Limits(fuel=5))


def test_program_application_shape():
    p = program_application(P.ProofVar("g"), (1, 2))
    assert isinstance(p, P.App) and isinstance(p.fn, P.TApp)
    assert p.fn.proof.arg is not None


def test_assemble_even_is_guarded(even_setup):
    _, _, asm = even_setup
    assert isinstance(asm.guard, NoneFoundUpToDepth)
    assert len(asm.system.equations) == 3


def test_assemble_rejects_zero_is_one():
    ha = build_HA()
    F = FunctionSymbol("G", (IOTA,), IOTA)
    spec = EquationalSpec(F, (), (Equation(zero(), succ(zero())),))
    with pytest.raises(GuardViolation) as e:
        assemble_theory(ha, spec)
    assert e.value.report.term == succ(zero())


def test_assemble_without_spec_is_plain_ha():
    ha = build_HA()
    asm = assemble_theory(ha)
    assert asm.system == ha.system
    assert isinstance(asm.guard, NoneFoundUpToDepth)


def test_projection_arity_zero_normal_form():
    src = P.Pack(zero(), P.Pair(parigot(0), P.I))
    nf = P.normalize_proof(project_witness(src, 0)).value
    assert P.alpha_eq(nf, P.Pack(zero(), parigot(0)))


def test_projected_even_char_checks_and_agrees(even_setup):
    th, items, asm = even_setup
    it = items["evenChar"]
    proof = program(items, "evenChar")
    proj = project_witness(proof, 1, it.statement)
    from dedmod.arith import program_shape

    assert check(asm.system, Context(), proj, program_shape(1)) == Valid()
    for n in range(5):
        a = run_program(asm.system, proof, (n,)).output
        b = run_program(asm.system, proj, (n,)).output
        assert a == b


@pytest.mark.parametrize("n", range(6))
def test_verify_even(even_setup, n):
    th, items, asm = even_setup
    spec = Equational(even_spec(th))
    q = run_program(asm.system, program(items, "evenChar"), (n,)).output
    assert verify_output(asm.system, spec, (n,), q) == Verified()


def test_verify_rejects_wrong_output(even_setup):
    th, _, asm = even_setup
    v = verify_output(asm.system, Equational(even_spec(th)), (4,), 0)
    assert isinstance(v, Unverified)


def test_verify_propositional_is_unverified(HA):
    spec = Propositional(TOP, 1)
    assert isinstance(verify_output(HA, spec, (1,), 1), Unverified)


def test_equational_shape_mentions_main(even_setup):
    th, _, _ = even_setup
    shape = Equational(even_spec(th)).shape()
    assert "F" in str(shape)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 12))
def test_parity_function_normalizes(n):
    th = load("ha_even.dmt")
    F = th.signature.functions["F"]
    r = normalize_term(th.system, Apply(F, (numeral(n),)))
    assert r.normal and r.value == numeral((n + 1) % 2)


def test_top_and_bot_stay_apart(even_setup):
    _, _, asm = even_setup
    assert not isinstance(decide_congruence(asm.system, TOP, BOT), Equivalent)
