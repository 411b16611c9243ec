"""Command line entry point: generate, run, opt, verify."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import checks
from .harness import emit, run_trials
from .instances import FAMILIES, generate, load, realization_from_json, realization_to_json, save
from .offline import BudgetExhausted, exact_opt


def _cmd_generate(args) -> int:
    universe = json.loads(args.universe) if args.universe else None
    source = json.loads(args.source) if args.source else None
    inst, real = generate(args.family, n=args.n, m=args.m, tau=Fraction(args.tau),
                          eps=Fraction(args.eps), max_set_size=args.max_set_size,
                          seed=args.seed, universe=universe, source=source)
    Path(args.out).write_text(save(inst) + "\n")
    if real is not None and args.realization_out:
        Path(args.realization_out).write_text(json.dumps(realization_to_json(real), indent=1) + "\n")
    return 0


def _seed(args) -> int:
    env = os.environ.get("UNCOVER_SEED")
    return int(env) if env not in (None, "") else args.seed


def _cmd_run(args) -> int:
    seed = _seed(args)
    reports = []
    for path in args.instance:
        inst = load(Path(path).read_text())
        for alg in args.alg:
            reports.append(run_trials(inst, alg, args.trials, seed, with_opt=args.opt,
                                      with_verify=args.verify_alpha is not None,
                                      alpha=Fraction(args.verify_alpha or 2),
                                      workers=args.workers))
    fmt = "json" if str(args.out).endswith(".json") else "csv"
    emit(reports, fmt, args.out)
    return 0


def _cmd_opt(args) -> int:
    inst = load(Path(args.instance).read_text())
    real = realization_from_json(json.loads(Path(args.realization).read_text()), inst)
    try:
        res = exact_opt(inst, real, args.budget)
    except BudgetExhausted as exc:
        print(json.dumps({"error": str(exc), "lower": exc.lower, "upper": exc.upper}))
        return 2
    print(json.dumps(res.to_json()))
    return 0


def _cmd_verify(args) -> int:
    names = list(checks.SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        kwargs = {}
        if args.trials is not None and name in ("lb-capped", "lb-doubled"):
            kwargs["trials"] = args.trials
        if args.workers > 1 and name in ("lb-capped", "lb-doubled"):
            kwargs["workers"] = args.workers
        result = checks.SUITES[name](**kwargs)
        print(result.line(), flush=True)
        ok = ok and result.passed
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uncover", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an instance file")
    g.add_argument("--family", required=True, choices=FAMILIES)
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--m", type=int, default=4)
    g.add_argument("--tau", default="1/2")
    g.add_argument("--eps", default="1/100")
    g.add_argument("--max-set-size", type=int, default=4)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--universe", help="JSON list, setcover family only")
    g.add_argument("--source", help="JSON list of lists, setcover family only")
    g.add_argument("--out", required=True)
    g.add_argument("--realization-out", help="where to write the intended realization, if any")
    g.set_defaults(func=_cmd_generate)

    r = sub.add_parser("run", help="Monte Carlo trials of one or more algorithms")
    r.add_argument("--instance", required=True, action="append")
    r.add_argument("--alg", required=True, action="append",
                   help="disjoint, detrhs, mincover, minset or baseline:{all,random,width}")
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--opt", action="store_true", help="compute the exact optimum per trial")
    r.add_argument("--verify-alpha", help="check every iteration against this factor")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--out", required=True, help="report path ending in .csv or .json")
    r.set_defaults(func=_cmd_run)

    o = sub.add_parser("opt", help="exact optimum for one realization")
    o.add_argument("--instance", required=True)
    o.add_argument("--realization", required=True)
    o.add_argument("--budget", type=int, default=2_000_000)
    o.set_defaults(func=_cmd_opt)

    v = sub.add_parser("verify", help="run a self-checking suite")
    v.add_argument("--suite", required=True, choices=[*checks.SUITES, "all"])
    v.add_argument("--trials", type=int, help="trial count for the lb-capped/lb-doubled suites")
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
