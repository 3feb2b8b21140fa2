"""Command-line driver.

Subcommands: explore, outline, hoare, refine, oracle.  Exit codes: 0 all
checks pass, 1 violation found, 2 step bound exhausted, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .explore import check_hoare, check_outline, explore
from .litmus import LitmusError, build_system, parse_litmus
from .oracle import fifo_check
from .program import ProgramError
from .refine import builtin_impls, check_simulation, check_trace_refinement
from .state import StateError, Sym

OK, VIOLATION, BOUND, INPUT_ERROR = 0, 1, 2, 3


class _Argparser(argparse.ArgumentParser):
    def error(self, message):
        raise LitmusError(message)


def _build_parser():
    p = _Argparser(prog="rarcheck", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("explore", help="enumerate terminal outcomes")
    ex.add_argument("file")
    ex.add_argument("--max-steps", type=int, default=64)
    ex.add_argument("--json", action="store_true")
    ex.add_argument("--jobs", type=int, default=1)

    ol = sub.add_parser("outline", help="check a proof outline")
    ol.add_argument("file")
    ol.add_argument("--max-steps", type=int, default=64)
    ol.add_argument("--json", action="store_true")

    ho = sub.add_parser("hoare", help="check {pre} program {final}")
    ho.add_argument("file")
    ho.add_argument("--max-steps", type=int, default=64)
    ho.add_argument("--json", action="store_true")

    rf = sub.add_parser("refine", help="check forward simulation")
    rf.add_argument("--impl", required=True, choices=sorted(builtin_impls()))
    rf.add_argument("--client", required=True)
    rf.add_argument("--max-steps", type=int, default=64)
    rf.add_argument("--json", action="store_true")
    rf.add_argument("--skip-trace-check", action="store_true")

    orc = sub.add_parser("oracle", help="brute-force cross checks")
    orc.add_argument("what", choices=["fifo"])
    orc.add_argument("--enqs", type=int, default=3)
    orc.add_argument("--json", action="store_true")
    return p


def _jval(v):
    if isinstance(v, Sym):
        return v.name
    return v


def _emit(report: dict, as_json: bool):
    if as_json:
        print(json.dumps(report, indent=2, default=_jval))
        return
    print(f"verdict: {report['verdict']}")
    for key in ("states_explored", "truncated"):
        if key in report:
            print(f"{key}: {report[key]}")
    for oc in report.get("outcomes", []):
        print("outcome:", " ".join(f"{k}={_jval(v)}" for k, v in oc.items()))
    for name, verdict in report.get("assertions", {}).items():
        print(f"{name}: {verdict}")
    if report.get("witness"):
        print("witness:")
        for step in report["witness"]:
            print(f"  thread {step['thread']}: {step['label']}")
    if report.get("detail"):
        print(report["detail"])


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise LitmusError(str(e))
    return build_system(parse_litmus(text))


def _cmd_explore(args) -> int:
    system = _load(args.file)
    res = explore(system.cfg0, system.ctx, args.max_steps, jobs=args.jobs)
    outcomes = [{k: _jval(v) for k, v in oc.items()} for oc in res.outcomes]
    verdict, code, witness = "pass", OK, None
    if system.outline.final is not None:
        rep = check_hoare(system.cfg0, system.ctx, system.outline.pre,
                          system.outline.final, args.max_steps)
        if rep.verdict == "invalid":
            verdict, code, witness = "violation", VIOLATION, rep.witness
        elif rep.verdict == "unknown-beyond-bound":
            verdict, code = "unknown-beyond-bound", BOUND
    elif res.truncated:
        verdict, code = "unknown-beyond-bound", BOUND
    _emit({"verdict": verdict, "states_explored": res.states_explored,
           "outcomes": outcomes, "witness": witness or [],
           "truncated": res.truncated}, args.json)
    return code


def _cmd_outline(args) -> int:
    system = _load(args.file)
    rep = check_outline(system.cfg0, system.ctx, system.outline,
                        args.max_steps)
    assertions = {name: r.verdict for name, r in sorted(rep.verdicts.items())}
    witness = next((r.witness for r in rep.verdicts.values()
                    if r.verdict == "invalid"), None)
    verdict = "valid" if rep.valid else "invalid"
    code = OK if rep.valid else VIOLATION
    if rep.valid and rep.truncated:
        verdict, code = "unknown-beyond-bound", BOUND
    _emit({"verdict": verdict, "states_explored": rep.states_explored,
           "assertions": assertions, "witness": witness or [],
           "truncated": rep.truncated}, args.json)
    return code


def _cmd_hoare(args) -> int:
    system = _load(args.file)
    rep = check_hoare(system.cfg0, system.ctx, system.outline.pre,
                      system.outline.final, args.max_steps)
    code = {"valid": OK, "invalid": VIOLATION,
            "unknown-beyond-bound": BOUND}[rep.verdict]
    _emit({"verdict": rep.verdict, "states_explored": rep.states_explored,
           "witness": rep.witness or [], "truncated": rep.truncated,
           "detail": rep.detail}, args.json)
    return code


def _cmd_refine(args) -> int:
    impl = builtin_impls()[args.impl]
    try:
        with open(args.client, encoding="utf-8") as fh:
            lf = parse_litmus(fh.read())
    except OSError as e:
        raise LitmusError(str(e))
    sim = check_simulation(impl, lf, args.max_steps)
    report = {"verdict": sim.verdict, "relation_size": sim.relation_size,
              "pairs_explored": sim.pairs_explored,
              "witness": sim.counterexample or [], "detail": sim.detail}
    if sim.ok and not args.skip_trace_check:
        tr = check_trace_refinement(impl, lf, args.max_steps)
        report["trace_check"] = tr.verdict
        if not tr.ok:
            report["verdict"] = "trace-check-failed"
            report["witness"] = tr.counterexample or []
    _emit(report, args.json)
    if report["verdict"] == "simulation-found":
        return OK
    if report["verdict"] == "unknown-beyond-bound":
        return BOUND
    return VIOLATION


def _cmd_oracle(args) -> int:
    res = fifo_check(args.enqs)
    _emit(res, args.json)
    return OK if res["verdict"] == "pass" else VIOLATION


def run_cli(argv) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except LitmusError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    try:
        if args.command == "explore":
            return _cmd_explore(args)
        if args.command == "outline":
            return _cmd_outline(args)
        if args.command == "hoare":
            return _cmd_hoare(args)
        if args.command == "refine":
            return _cmd_refine(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
    except (LitmusError, ProgramError, StateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    return INPUT_ERROR


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
