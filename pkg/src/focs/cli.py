"""Command line entry point.

Exit codes: 0 ok, 1 input or I/O error, 2 infeasible instance, 3 verification
failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import io as fio
from .algorithm import run_focs
from .generate import random_instance
from .instance import InfeasibleInstanceError, InstanceError, Objective, ScheduleError, aggregate_power, objective_value
from .rational import as_rational, format_rational
from .verification import OracleTooLargeError, check_kkt, recover_duals, oracle_solve

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("focs")


def _objective(args) -> Objective:
    return Objective(as_rational(args.alpha))


def _emit(text: str, out: Optional[Path], name: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)


def _fmt_number(x) -> str:
    return format_rational(x) if not isinstance(x, float) else repr(x)


def cmd_solve(args) -> int:
    instance = fio.read_instance(args.instance)
    result = run_focs(instance, trace=args.trace)
    obj = _objective(args)
    summary = {
        "objective": _fmt_number(objective_value(result.profile, obj)),
        "alpha": format_rational(obj.alpha),
        "rounds": len(result.rounds),
        "iterations": result.iterations,
        "ranks": {str(i): r for i, r in sorted(result.ranks.items())},
        "critical_sets": [sorted(c) for c in result.critical_sets],
    }
    if args.out is None:
        sys.stdout.write(fio.dumps_profile(result.profile))
        sys.stdout.write(json.dumps(summary) + "\n")
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fio.write_schedule(result.schedule, out / "schedule.csv")
    fio.write_profile(result.profile, out / "profile.csv")
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if args.trace:
        (out / "trace.jsonl").write_text("".join(json.dumps(r) + "\n" for r in result.trace_records()))
    print(json.dumps(summary))
    return EXIT_OK


def cmd_verify(args) -> int:
    if not args.schedule:
        raise InstanceError("--schedule is required")
    instance = fio.read_instance(args.instance)
    schedule = fio.read_schedule(args.schedule, instance)
    tol = args.tol
    report = check_kkt(schedule, tol=tol)
    cert = recover_duals(schedule, _objective(args), tol=tol)
    payload = {"kkt": report.to_json(), "certificate": cert.to_json(), "passed": report.passed and cert.valid}
    _emit(json.dumps(payload, indent=2) + "\n", Path(args.out) if args.out else None, "kkt_report.json")
    if not payload["passed"]:
        for v in report.violations:
            print(f"{v.condition} violated for job {v.job} at intervals {v.intervals}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_oracle(args) -> int:
    instance = fio.read_instance(args.instance)
    obj = _objective(args)
    schedule = oracle_solve(instance, obj, as_rational(args.delta))
    profile = aggregate_power(schedule)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        fio.write_schedule(schedule, out / "oracle_schedule.csv")
        fio.write_profile(profile, out / "oracle_profile.csv")
    else:
        sys.stdout.write(fio.dumps_profile(profile))
    print(json.dumps({"objective": _fmt_number(objective_value(profile, obj)), "delta": args.delta}))
    return EXIT_OK


def cmd_gen(args) -> int:
    instance = random_instance(args.jobs, args.horizon, seed=args.seed)
    text = fio.dumps_instance(instance)
    if args.out is None:
        sys.stdout.write(text)
    elif args.out.endswith(".json"):
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        _emit(text, Path(args.out), "instance.json")
    return EXIT_OK


def cmd_trace(args) -> int:
    instance = fio.read_instance(args.instance)
    result = run_focs(instance, trace=True)
    text = "".join(json.dumps(r) + "\n" for r in result.trace_records())
    _emit(text, Path(args.out) if args.out else None, "trace.jsonl")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "oracle": cmd_oracle, "gen": cmd_gen, "trace": cmd_trace}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="focs", description="Exact offline EV charging scheduler.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--instance", help="instance JSON file")
        p.add_argument("--out", help="output directory (stdout when omitted)")
        p.add_argument("--alpha", default="2", help="objective exponent, > 1")
        if name == "verify":
            p.add_argument("--schedule", help="schedule CSV to certify")
            p.add_argument("--tol", type=float, default=None, help="relative tolerance for float-derived schedules")
        if name == "oracle":
            p.add_argument("--delta", default="1/4", help="grid step for enumeration")
        if name == "gen":
            p.add_argument("--jobs", type=int, default=5)
            p.add_argument("--horizon", default="24")
            p.add_argument("--seed", type=int, default=0)
        if name == "solve":
            p.add_argument("--trace", action="store_true", help="also write trace.jsonl")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.command != "gen" and not args.instance:
        print("error: --instance is required", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except InfeasibleInstanceError as exc:
        print(f"infeasible: {', '.join(exc.job_ids)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InstanceError, ScheduleError, OracleTooLargeError, OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
