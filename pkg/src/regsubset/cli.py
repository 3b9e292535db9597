"""Command-line interface: ``regsubset {generate,solve,bench,evaluate}``.

Exit codes: 0 success, 1 solver or data error (a JSON object on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .bench import BenchPlan, run_bench
from .dataset import generate, load_csv, save_csv, sidecar_for
from .objectives import Kind, ObjectiveSpec, fit
from .solver import BIG_M_CHOICES, METHODS, solve


def _theta(s: str):
    if s == "auto":
        return s
    v = float(s)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("theta must be 'auto' or a number in (0, 1]")
    return v


def _positive(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _objective(s: str) -> Kind:
    try:
        return Kind.parse(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _clean(obj):
    # JSON has no NaN/inf
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(doc, out: str | None):
    text = json.dumps(_clean(doc), indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="regsubset", description="Best-subset linear regression")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic instance as CSV")
    g.add_argument("--m", type=int, required=True, help="number of predictors (multiple of 5)")
    g.add_argument("--n", type=int, required=True, help="number of observations")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="CSV path; a .json sidecar is written next to it")

    s = sub.add_parser("solve", help="select a subset for an instance")
    s.add_argument("instance", help="CSV file with a 'b' column")
    s.add_argument("--objective", type=_objective, default=Kind.MAE,
                   help="mae, mse, mae-a or mse-a")
    s.add_argument("--method", choices=METHODS, default="mip")
    s.add_argument("--time-limit", type=_positive, default=60.0)
    s.add_argument("--theta", type=_theta, default="auto")
    s.add_argument("--lambda", dest="lam", type=_positive, default=1.0)
    s.add_argument("--big-m", choices=BIG_M_CHOICES, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--cuts", choices=("on", "off"), default="off")
    s.add_argument("--trace", nargs="?", const="trace.jsonl", default=None,
                   help="append per-iteration JSON lines (core methods)")
    s.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    s.add_argument("--dump-lp", default=None, help="write the built model in LP text format")

    b = sub.add_parser("bench", help="run a benchmark sweep")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--case", choices=("thin", "fat", "both"), default="thin")
    b.add_argument("--full", action="store_true", help="use the large grid (hours of runtime)")
    b.add_argument("--time-limit", type=_positive, default=None)
    b.add_argument("--methods", default=None, help="comma-separated subset of methods")
    b.add_argument("--replicates", type=int, default=None)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--threads", type=int, default=1)

    e = sub.add_parser("evaluate", help="score an explicit subset")
    e.add_argument("instance")
    e.add_argument("--subset", default="", help="comma-separated column names (empty: no predictors)")
    e.add_argument("--objective", type=_objective, default=Kind.MAE)
    e.add_argument("--lambda", dest="lam", type=_positive, default=1.0)
    e.add_argument("--out", default=None)
    return p


def _cmd_generate(args):
    inst = generate(args.m, args.n, args.seed)
    save_csv(inst, args.out, sidecar=sidecar_for(inst))
    return {"path": args.out, "m": inst.m, "n": inst.n, "seed": args.seed}


def _cmd_solve(args):
    inst = load_csv(args.instance)
    spec = ObjectiveSpec(args.objective, args.lam)
    trace = open(args.trace, "a") if args.trace else None
    try:
        rep = solve(inst, spec, args.method, big_m=args.big_m, time_limit=args.time_limit,
                    theta=args.theta, seed=args.seed, use_cuts=args.cuts == "on", trace=trace)
    finally:
        if trace:
            trace.close()
    doc = rep.to_dict(inst.var_names)
    doc["objective_kind"] = spec.kind.value
    doc["lambda"] = spec.lam
    doc["threads"] = 1
    if "theta" in rep.extra:
        doc["theta"] = rep.extra["theta"]
    if args.dump_lp:
        model = rep.extra.get("model")
        if model is None:
            raise ValueError("--dump-lp needs --method mip")
        Path(args.dump_lp).write_text(model.to_lp_text())
    return doc


def _cmd_bench(args):
    kw = {"seed": args.seed}
    if args.time_limit:
        kw["time_limit"] = args.time_limit
    if args.methods:
        kw["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
        bad = [m for m in kw["methods"] if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}")
    plans = []
    if args.case in ("thin", "both"):
        plans.append(BenchPlan.full_thin(**kw) if args.full else BenchPlan.desk_thin(**kw))
    if args.case in ("fat", "both"):
        plans.append(BenchPlan.full_fat(**kw) if args.full else BenchPlan.desk_fat(**kw))
    summary = {}
    for plan in plans:
        if args.replicates:
            plan.grid = [(m, n, args.replicates) for m, n, _ in plan.grid]
        out = Path(args.out) / plan.label
        rows = run_bench(plan, out)
        summary[plan.label] = {"rows": len(rows), "errors": sum(r.error is not None for r in rows),
                               "dir": str(out)}
    return summary


def _cmd_evaluate(args):
    inst = load_csv(args.instance)
    names = [s.strip() for s in args.subset.split(",") if s.strip()]
    unknown = [s for s in names if s not in inst.var_names]
    if unknown:
        raise ValueError(f"unknown columns {unknown}")
    idx = [inst.var_names.index(s) for s in names]
    spec = ObjectiveSpec(args.objective, args.lam)
    sol = fit(inst, idx, spec)
    doc = sol.to_dict(inst.var_names)
    doc["objective_kind"] = spec.kind.value
    return doc


COMMANDS = {"generate": _cmd_generate, "solve": _cmd_solve, "bench": _cmd_bench,
            "evaluate": _cmd_evaluate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = COMMANDS[args.command](args)
    except Exception as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    _emit(doc, getattr(args, "out", None) if args.command in ("solve", "evaluate") else None)
    return 0
