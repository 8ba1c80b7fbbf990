"""``dm``: command-line driver.

Exit codes: 0 success, 1 invalid/distinct/guard violation, 2 undecided or
fuel exhausted, 3 parse or sort error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import proofterm as P
from .arith import program_shape
from .checker import Context, Invalid, Undecided, Valid, check
from .extract import (
    DecodeFailure,
    OutputShapeMismatch,
    ProgramFuelExhausted,
    project_witness,
    run_program,
)
from .parser import ParseError, Theory, parse_proof, parse_proofs, parse_prop, parse_term, parse_theory, resolve
from .rewrite import (
    Distinct,
    Equivalent,
    Limits,
    ViolationFound,
    critical_pairs,
    decide_congruence,
    guard_zero_succ,
    normalize_prop,
    normalize_term,
)
from .syntax import SortError

OK, FAIL, UNDECIDED, BAD_INPUT = 0, 1, 2, 3
_PREVIEW = 400  # characters of a non-normal value to print


class _Out:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.payload: dict = {}

    def line(self, text: str = ""):
        if not self.as_json:
            print(text)

    def set(self, **kw):
        self.payload.update(kw)

    def finish(self, code: int) -> int:
        if self.as_json:
            self.payload["exit"] = code
            print(json.dumps(self.payload, indent=2, default=str))
        return code


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_theory(path: str) -> Theory:
    try:
        return parse_theory(_read(path))
    except ParseError as e:
        raise _InputError(f"{path}:{e}", e) from e


def _load_proofs(path: str, th: Theory):
    try:
        return parse_proofs(_read(path), th)
    except ParseError as e:
        raise _InputError(f"{path}:{e}", e) from e


class _InputError(Exception):
    def __init__(self, msg, cause=None):
        super().__init__(msg)
        self.cause = cause


def _limits(args) -> Limits:
    return Limits.from_env(args.fuel, args.depth)


def _path(p) -> str:
    return ".".join(p) or "root"


def _context(items, upto: int) -> Context:
    return Context(tuple((it.name, it.statement) for it in items[:upto]))


def _resolved(items, name: str) -> P.ProofTerm:
    try:
        return resolve(items, name)
    except KeyError:
        raise _InputError(f"no proof named {name}") from None


def _find(items, name):
    for i, it in enumerate(items):
        if it.name == name:
            return i, it
    raise _InputError(f"no proof named {name}")


def _verdict_code(res) -> int:
    if isinstance(res, Valid):
        return OK
    if isinstance(res, Undecided):
        return UNDECIDED
    return FAIL


def _describe(res) -> dict:
    if isinstance(res, Valid):
        return {"verdict": "valid"}
    if isinstance(res, Invalid):
        return {"verdict": "invalid", "path": list(res.path), "reason": res.reason}
    return {
        "verdict": "undecided",
        "path": list(res.path),
        "reason": res.reason,
        "pair": [str(x) if x is not None else None for x in res.pair],
    }


def _show(res) -> str:
    if isinstance(res, Valid):
        return "valid"
    if isinstance(res, Invalid):
        return f"invalid at {_path(res.path)}: {res.reason}"
    a, b = res.pair
    pair = f"{a}" if b is None else f"{a} ~ {b}"
    return f"undecided at {_path(res.path)}: {pair} ({res.reason})"


# ---------------------------------------------------------------------------
# commands


def cmd_check(args, out: _Out) -> int:
    th = _load_theory(args.theory)
    items = _load_proofs(args.proofs, th)
    R, lim = th.system, _limits(args)
    results = []
    worst = OK
    for i, it in enumerate(items):
        res = check(R, _context(items, i), it.proof, it.statement, lim)
        results.append({"name": it.name, **_describe(res)})
        out.line(f"{it.name}: {_show(res)}")
        code = _verdict_code(res)
        if code == FAIL or (code == UNDECIDED and worst == OK):
            worst = code
    out.set(command="check", items=results)
    return worst


def cmd_normalize(args, out: _Out) -> int:
    th = _load_theory(args.theory)
    R, lim = th.system, _limits(args)
    sig = th.signature
    try:
        if args.kind == "term":
            r = normalize_term(R, parse_term(args.expr, sig), lim, trace=args.trace)
        elif args.kind == "prop":
            r = normalize_prop(R, parse_prop(args.expr, sig), lim, trace=args.trace)
        else:
            r = P.normalize_proof(parse_proof(args.expr, sig), lim.fuel)
    except ParseError as e:
        raise _InputError(f"<expr>:{e}", e) from e
    if args.trace:
        for s in r.trace:
            out.line(f"  {s}")
    try:
        shown = str(r.value)
    except RecursionError:
        shown = "<too deep to print>"
    if not r.normal:
        if len(shown) > _PREVIEW:
            shown = shown[:_PREVIEW] + " ..."
        out.line(f"fuel exhausted after {r.steps} steps; last value:")
    out.line(shown)
    out.set(command="normalize", kind=args.kind, result=shown, normal=r.normal,
            steps=r.steps, trace=[str(s) for s in r.trace])
    return OK if r.normal else UNDECIDED


def _parse_either(text: str, sig):
    try:
        return parse_term(text, sig)
    except ParseError:
        pass
    try:
        return parse_prop(text, sig)
    except ParseError as e:
        raise _InputError(f"<expr>:{e}", e) from e


def cmd_eq(args, out: _Out) -> int:
    th = _load_theory(args.theory)
    R, lim = th.system, _limits(args)
    a = _parse_either(args.a, th.signature)
    b = _parse_either(args.b, th.signature)
    if type(a).__mro__[-2] is not type(b).__mro__[-2]:
        raise _InputError("cannot compare a term with a proposition")
    v = decide_congruence(R, a, b, lim)
    if isinstance(v, Equivalent):
        out.line("equivalent")
        if args.trace:
            for s in v.left:
                out.line(f"  left:  {s}")
            for s in v.right:
                out.line(f"  right: {s}")
        out.set(command="eq", verdict="equivalent",
                trace={"left": [str(s) for s in v.left], "right": [str(s) for s in v.right]})
        return OK
    if isinstance(v, Distinct):
        out.line(f"distinct: {v.reason}")
        out.set(command="eq", verdict="distinct", reason=v.reason, caveat=v.caveat)
        return FAIL
    out.line(f"undecided: {v.reason}")
    out.set(command="eq", verdict="undecided", reason=v.reason)
    return UNDECIDED


def _guard(th: Theory, lim: Limits, out: _Out):
    if not th.equations:
        return None
    report = guard_zero_succ(th.system, lim)
    if isinstance(report, ViolationFound):
        out.line(f"guard violation: 0 is congruent to {report.term}")
        for s in report.trace:
            out.line(f"  {s}")
        out.set(guard={"status": "violation", "term": str(report.term),
                       "trace": [str(s) for s in report.trace]})
        return FAIL
    out.set(guard={"status": "none-found", "depth": report.depth, "explored": report.explored})
    return None


def cmd_run(args, out: _Out) -> int:
    th = _load_theory(args.theory)
    items = _load_proofs(args.proofs, th)
    lim = _limits(args)
    out.set(command="run", name=args.name, inputs=args.args)
    code = _guard(th, lim, out)
    if code is not None:
        return code
    proof = _resolved(items, args.name)
    try:
        rep = run_program(th.system, proof, args.args, lim)
    except ProgramFuelExhausted as e:
        out.line(f"fuel exhausted: {e}")
        out.set(error="fuel exhausted", message=str(e))
        return UNDECIDED
    except (OutputShapeMismatch, DecodeFailure) as e:
        out.line(f"extraction failed: {e}")
        out.set(error="extraction", message=str(e))
        return FAIL
    out.line(str(rep.output))
    if args.trace:
        out.line(f"witness: {rep.witness}")
        out.line(f"reduction steps: {rep.reduction_steps}")
        out.line(f"rewrite steps: {rep.rewrite_steps}")
    out.set(output=rep.output, witness=str(rep.witness), reduction_steps=rep.reduction_steps,
            rewrite_steps=rep.rewrite_steps)
    return OK


def cmd_project(args, out: _Out) -> int:
    th = _load_theory(args.theory)
    items = _load_proofs(args.proofs, th)
    i, item = _find(items, args.name)
    lim = _limits(args)
    projected = project_witness(item.proof, args.arity, item.statement)
    res = check(th.system, _context(items, i), projected, program_shape(args.arity), lim)
    out.line(str(projected))
    out.line(f"check: {_show(res)}")
    out.set(command="project", name=args.name, arity=args.arity, proof=str(projected),
            **_describe(res))
    return _verdict_code(res)


def cmd_analyze(args, out: _Out) -> int:
    th = _load_theory(args.theory)
    R, lim = th.system, _limits(args)
    n_prop = len(R.prop_rules) + int(R.comprehension)
    out.line(f"proposition rules: {n_prop}"
             + (" (comprehension schema counted once)" if R.comprehension else ""))
    out.line(f"term rules: {len(R.term_rules)}")
    out.line(f"equations: {len(R.equations)} ({len(R.unoriented)} unoriented)")
    out.line(f"impredicative: {'yes' if R.impredicative else 'no'}")
    pairs = critical_pairs(R.term_rules)
    out.line(f"critical pairs among term rules: {len(pairs)}")
    for cp in pairs:
        out.line(f"  {cp.peak}: {cp.left} <- -> {cp.right}")
    out.set(command="analyze", prop_rules=n_prop, term_rules=len(R.term_rules),
            equations=len(R.equations), unoriented=len(R.unoriented),
            impredicative=R.impredicative,
            critical_pairs=[{"peak": str(c.peak), "left": str(c.left), "right": str(c.right)}
                            for c in pairs])
    code = _guard(th, lim, out)
    if code is not None:
        return code
    if th.equations:
        g = out.payload["guard"]
        out.line(f"guard: no successor congruent to 0 found up to depth {g['depth']}")
    return OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dm", description="Proof checking modulo rewriting.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fuel", type=int, default=None,
                        help="step budget (default 10^6 or $DM_FUEL)")
    common.add_argument("--depth", type=int, default=None, help="search depth (default 8)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--trace", action="store_true", help="print rewrite/reduction traces")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check every proof in a file")
    p.add_argument("theory")
    p.add_argument("proofs")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("normalize", parents=[common], help="normalize an expression")
    p.add_argument("theory")
    p.add_argument("kind", choices=["term", "prop", "proof"])
    p.add_argument("expr")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("eq", parents=[common], help="decide a congruence")
    p.add_argument("theory")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(fn=cmd_eq)

    p = sub.add_parser("run", parents=[common], help="run a program proof on naturals")
    p.add_argument("theory")
    p.add_argument("proofs")
    p.add_argument("name")
    p.add_argument("args", nargs="*", type=int)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("project", parents=[common], help="drop the correctness part")
    p.add_argument("theory")
    p.add_argument("proofs")
    p.add_argument("name")
    p.add_argument("--arity", type=int, required=True)
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("analyze", parents=[common], help="report on a theory")
    p.add_argument("theory")
    p.set_defaults(fn=cmd_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = _Out(args.json)
    try:
        code = args.fn(args, out)
    except _InputError as e:
        cause = e.cause
        out.set(error="input", message=str(e))
        if isinstance(cause, ParseError):
            out.set(line=cause.line, col=cause.col)
        if not args.json:
            print(f"error: {e}", file=sys.stderr)
        code = BAD_INPUT
    except (SortError, OSError, ValueError) as e:
        out.set(error="input", message=str(e))
        if not args.json:
            print(f"error: {e}", file=sys.stderr)
        code = BAD_INPUT
    return out.finish(code)


if __name__ == "__main__":
    sys.exit(main())
