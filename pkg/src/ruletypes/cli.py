"""Command-line driver: load a signature + rules file, run checking,
inference, constraint solving, or context validation, and print derivations,
constraint sets, substitutions, and diagnostics as text or JSON.

Exit codes: 0 well-typed/solved, 1 type error/failed, 2 parse error,
3 ill-formed signature or mode mismatch, 4 stuck, 5 enumeration budget
exceeded.  A file with several rules exits with the worst per-rule code.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from . import checker, oracle, solver
from .context import validate
from .core import Cond, Conj, Constraint, ConstraintSet, Derivation, Match, Rule, Sub, Substitution
from .infer import FreshSupply, InferError, infer_rule, init_context
from .surface import ParseError, build_context, parse, render_instance, resolve_rule


# ---------------------------------------------------------------------------
# Text rendering

def _judgment(d: Derivation) -> str:
    subject = f"({d.subject})" if isinstance(d.subject, (Cond, Rule)) else str(d.subject)
    return f"{subject} : {d.type}"


def _new_constraints(d: Derivation) -> list[Constraint]:
    if d.constraints is None:
        return []
    inherited: set[Constraint] = set()
    for p in d.premises:
        if p.constraints is not None:
            inherited |= set(p.constraints)
    return [c for c in d.constraints if c not in inherited]


def render_derivation(d: Derivation) -> str:
    """One judgment per line, two spaces of indent per premise depth, the
    rule label right-aligned after the widest judgment."""
    rows: list[tuple[int, Derivation]] = []

    def collect(node: Derivation, depth: int) -> None:
        rows.append((depth, node))
        for p in node.premises:
            collect(p, depth + 1)

    collect(d, 0)
    bodies = []
    for depth, node in rows:
        body = "  " * depth + _judgment(node)
        if node.constraints is not None:
            new = _new_constraints(node)
            body += " • {" + ", ".join(str(c) for c in new) + "}"
        bodies.append(body)
    width = max(len(b) for b in bodies)
    return "\n".join(f"{body:<{width}}  [{node.rule}]"
                     for body, (_, node) in zip(bodies, rows))


def render_trace(steps: tuple[solver.TraceStep, ...]) -> str:
    lines = []
    for step in steps:
        consumed = ", ".join(str(c) for c in step.consumed)
        parts = [f"({step.rule}) {consumed}"]
        if step.produced:
            parts.append("=> " + ", ".join(str(c) for c in step.produced))
        for var, image in step.bound:
            parts.append(f"bind α{var} ↦ {image}")
        lines.append("  " + "  ".join(parts))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# JSON rendering

def constraint_json(c: Constraint) -> dict[str, str]:
    return {"kind": "sub" if isinstance(c, Sub) else "eq",
            "lhs": str(c.lhs), "rhs": str(c.rhs)}


def derivation_json(d: Derivation) -> dict[str, Any]:
    conclusion: dict[str, Any] = {"subject": str(d.subject), "type": str(d.type)}
    if d.constraints is not None:
        conclusion["constraints"] = [constraint_json(c) for c in d.constraints]
    return {"rule": d.rule, "conclusion": conclusion,
            "premises": [derivation_json(p) for p in d.premises]}


def subst_json(s: Substitution) -> list[dict[str, str]]:
    return [{"var": f"α{v}", "type": str(t)} for v, t in s.items()]


# ---------------------------------------------------------------------------
# Driver

def _arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruletypes",
        description="Type-check, infer, and solve rule expressions with "
                    "subtyping and variadic list operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "type-check every rule against its ground typings"),
        ("infer", "generate the constraint set of every rule"),
        ("solve", "generate constraints and run the resolution algorithm"),
        ("validate", "report signature well-formedness violations"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", nargs="?", help="input file; omit with --seed")
        p.add_argument("--trace", action="store_true",
                       help="print derivation trees and solver steps")
        p.add_argument("--format", choices=["text", "json"], default="text")
        p.add_argument("--seed", type=int, default=None,
                       help="run on generated corpus instance N instead of a file")
        p.add_argument("--max-enum", type=int, default=1_000_000,
                       help="budget for brute-force enumeration")
        if name == "solve":
            p.add_argument("--oracle", action="store_true",
                           help="cross-check the outcome against brute-force enumeration")
    return parser


def _emit(out: list[str], line: str) -> None:
    out.append(line)


def run(argv: list[str]) -> int:
    args = _arg_parser().parse_args(argv)
    as_json = args.format == "json"
    report: dict[str, Any] = {"command": args.command}
    out: list[str] = []

    if args.file is not None:
        name = args.file
        try:
            with open(args.file, encoding="utf-8") as fh:
                source = fh.read()
        except OSError as exc:
            print(f"{args.file}: {exc.strerror}", file=sys.stderr)
            return 2
    elif args.seed is not None:
        name = f"<seed {args.seed}>"
        ctx, rule = oracle.gen_instance(args.seed)
        source = render_instance(ctx, rule)
        if not as_json:
            _emit(out, source.rstrip("\n"))
    else:
        print("error: provide a file or --seed N", file=sys.stderr)
        return 2

    try:
        sf = parse(source)
    except ParseError as exc:
        print(f"{name}:{exc.pos}: parse error: {exc.message}", file=sys.stderr)
        return 2

    ctx = build_context(sf)
    violations = validate(ctx)

    if args.command == "validate":
        report["ok"] = not violations
        report["violations"] = [{"kind": v.kind, "detail": v.detail} for v in violations]
        if as_json:
            print(json.dumps(report, ensure_ascii=False, indent=2))
        else:
            print("\n".join(out + ([str(v) for v in violations] or ["ok"])))
        return 3 if violations else 0

    if violations:
        for v in violations:
            print(f"{name}: {v}", file=sys.stderr)
        return 3

    if args.command == "check":
        mode_problems = [f"{name}:{d.pos}: check mode needs a ground typing for "
                         f"{getattr(d, 'name', '?')}" for d in sf.fresh_marked]
        for decl in sf.rules:
            if any(m.ann is None for m in decl.conds):
                mode_problems.append(
                    f"{name}:{decl.pos}: check mode needs ground match annotations")
        if mode_problems:
            for p in mode_problems:
                print(p, file=sys.stderr)
            return 3

    codes = [0]
    rule_reports: list[dict[str, Any]] = []
    report["rules"] = rule_reports

    for index, decl in enumerate(sf.rules, start=1):
        rule = resolve_rule(decl, ctx)
        entry: dict[str, Any] = {"index": index}
        rule_reports.append(entry)

        if args.command == "check":
            outcome = checker.check_rule(ctx, rule)
            if isinstance(outcome, checker.WellTyped):
                entry["outcome"] = "well-typed"
                _emit(out, f"rule {index}: well-typed")
                if args.trace:
                    entry["derivation"] = derivation_json(outcome.derivation)
                    _emit(out, render_derivation(outcome.derivation))
            else:
                entry["outcome"] = "error"
                entry["error"] = {"kind": str(outcome.kind), "path": outcome.path,
                                  "detail": outcome.detail}
                _emit(out, f"{name}:{decl.pos}: rule {index}: error {outcome}")
                codes.append(1)
            continue

        # infer / solve share the generation step
        fresh = FreshSupply()
        gamma = init_context(ctx, rule, fresh)
        try:
            result = infer_rule(gamma, rule, fresh)
        except InferError as exc:
            entry["outcome"] = "error"
            entry["error"] = {"kind": str(exc.kind), "path": exc.path, "detail": exc.detail}
            _emit(out, f"{name}:{decl.pos}: rule {index}: error {exc}")
            codes.append(1)
            continue

        bindings = [f"{n} : {t}" for n, t in list(gamma.var_types.items())
                    + [(f"{n}*", t) for n, t in gamma.star_types.items()]]
        entry["context"] = ([{"name": n, "type": str(t)} for n, t in gamma.var_types.items()]
                            + [{"name": f"{n}*", "type": str(t)} for n, t in gamma.star_types.items()])
        entry["constraints"] = [constraint_json(c) for c in result.constraints]

        if args.command == "infer":
            _emit(out, f"rule {index}: Γ = {{{', '.join(bindings)}}}")
            _emit(out, f"rule {index}: C = {result.constraints}")
            if args.trace:
                entry["derivation"] = derivation_json(result.derivation)
                _emit(out, render_derivation(result.derivation))
            continue

        outcome = solver.solve(gamma, result.constraints)
        if args.trace:
            entry["derivation"] = derivation_json(result.derivation)
            _emit(out, f"rule {index}: C = {result.constraints}")
            _emit(out, render_derivation(result.derivation))
        if isinstance(outcome, solver.Solved):
            entry["result"] = "solved"
            entry["substitution"] = subst_json(outcome.subst)
            _emit(out, f"rule {index}: solved σ = {outcome.subst}")
        elif isinstance(outcome, solver.Failed):
            entry["result"] = "failed"
            entry["fail_rule"] = outcome.fail_rule
            entry["witness"] = [constraint_json(c) for c in outcome.witness]
            witness = ", ".join(str(c) for c in outcome.witness)
            _emit(out, f"rule {index}: failed by detection rule ({outcome.fail_rule}) on {witness}")
            codes.append(1)
        else:
            entry["result"] = "stuck"
            entry["residual"] = [constraint_json(c) for c in outcome.residual]
            _emit(out, f"rule {index}: stuck with residual {outcome.residual}")
            codes.append(4)
        if args.trace:
            entry["steps"] = [{"rule": s.rule,
                               "consumed": [constraint_json(c) for c in s.consumed],
                               "produced": [constraint_json(c) for c in s.produced],
                               "bound": [{"var": f"α{v}", "type": str(t)} for v, t in s.bound]}
                              for s in outcome.trace]
            _emit(out, render_trace(outcome.trace))

        if args.command == "solve" and getattr(args, "oracle", False):
            try:
                found = oracle.enumerate_solutions(
                    gamma, result.constraints, budget=args.max_enum, limit=1)
            except oracle.BudgetExceeded as exc:
                entry["oracle"] = "budget-exceeded"
                _emit(out, f"rule {index}: oracle: {exc}")
                codes.append(5)
                continue
            solved = isinstance(outcome, solver.Solved)
            satisfiable = bool(found)
            entry["oracle"] = "satisfiable" if satisfiable else "unsatisfiable"
            if isinstance(outcome, solver.Stuck):
                _emit(out, f"rule {index}: oracle: set is "
                           f"{'satisfiable' if satisfiable else 'unsatisfiable'} (outcome stuck)")
            elif solved != satisfiable:
                _emit(out, f"rule {index}: oracle DISAGREES with the solver "
                           f"(solver {'solved' if solved else 'failed'}, "
                           f"enumeration found {'a' if satisfiable else 'no'} solution)")
                codes.append(1)
            else:
                _emit(out, f"rule {index}: oracle agrees")

    if as_json:
        report["exit"] = max(codes)
        print(json.dumps(report, ensure_ascii=False, indent=2))
    elif out:
        print("\n".join(out))
    return max(codes)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
