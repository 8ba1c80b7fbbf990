"""Proof checking and program extraction in deduction modulo rewriting."""

from .arith import build_HA, decode_numeral, numeral, parigot, parigot_literal, program_shape
from .checker import Context, Invalid, Undecided, Valid, check, check_closed_program_shape, synthesize
from .extract import EquationalSpec, assemble_theory, project_witness, run_program, verify_output
from .parser import ParseError, parse_proof, parse_proofs, parse_prop, parse_term, parse_theory, resolve
from .rewrite import (
    Distinct,
    Equation,
    Equivalent,
    Limits,
    Orientation,
    PropRule,
    RewriteSystem,
    TermRule,
    decide_congruence,
    guard_zero_succ,
    normalize_prop,
    normalize_term,
)
from .proofterm import evaluate, normalize_proof

__all__ = [name for name in dir() if not name.startswith("_")]
