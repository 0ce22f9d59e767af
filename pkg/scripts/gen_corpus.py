#!/usr/bin/env python3
"""Regenerate the committed corpus fixtures: one instance file per seed plus
a summary of check/solve outcomes, used as a regression net.

Usage: python3 scripts/gen_corpus.py [--count N] [--out DIR]
"""

import argparse
import pathlib

from ruletypes import checker, solver
from ruletypes.infer import FreshSupply, infer_rule, init_context
from ruletypes.oracle import erase_annotations, gen_instance, strip_typings
from ruletypes.surface import render_instance


def outcomes(ctx, rule) -> tuple[str, str]:
    chk = checker.check_rule(ctx, rule)
    check_line = "well-typed" if isinstance(chk, checker.WellTyped) else str(chk.kind)

    fresh = FreshSupply()
    gamma = init_context(strip_typings(ctx), erase_annotations(rule), fresh)
    res = infer_rule(gamma, erase_annotations(rule), fresh)
    out = solver.solve(gamma, res.constraints)
    if isinstance(out, solver.Solved):
        solve_line = "solved"
    elif isinstance(out, solver.Failed):
        solve_line = f"failed({out.fail_rule})"
    else:
        solve_line = "stuck"
    return check_line, solve_line


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=20)
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path(__file__).parent.parent / "tests" / "fixtures" / "corpus")
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    summary = []
    for seed in range(args.count):
        ctx, rule = gen_instance(seed)
        (args.out / f"seed_{seed:03}.rules").write_text(render_instance(ctx, rule))
        check_line, solve_line = outcomes(ctx, rule)
        summary.append(f"seed_{seed:03} check={check_line} solve={solve_line}")
    (args.out / "summary.txt").write_text("\n".join(summary) + "\n")
    print(f"wrote {args.count} instances + summary to {args.out}")


if __name__ == "__main__":
    main()
