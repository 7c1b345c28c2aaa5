"""Command-line interface.

Exit codes: 0 success or pass, 1 verification failure (or inconclusive flow),
2 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from .core import NotTwoStepTypeError, RangeError, SkewnessError, build_algebra, classify_type, sample_tuple
from .derivations import derivation_algebra
from .experiments import (
    SOLITON_TOL,
    SURVEY_CSV_COLUMNS,
    SURVEY_CSV_VERSION,
    RunConfig,
    analyze_tuple,
    flow_checks,
    survey,
    survey_csv_row,
    verify_counterexample,
)
from .fileio import TupleFileError, read_tuple, tuple_to_json, write_tuple
from .flow import DEFAULT_FLOW_TOL, DEFAULT_MAX_ITER, certify_and_extract, minimal_vector_flow
from .geometry import MetricError
from .kernel import DEFAULT_RANK_TOL

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

INPUT_ERRORS = (RangeError, SkewnessError, NotTwoStepTypeError, TupleFileError, MetricError, OSError)


def _emit(report: dict, out: str | None, timestamp: bool = True) -> None:
    if timestamp:
        report = {**report, "timestamp": datetime.now(timezone.utc).isoformat()}
    text = json.dumps(report, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _type_arg(s: str) -> tuple[int, int]:
    try:
        p, q = (int(x) for x in s.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("type must be 'p,q'") from exc
    return p, q


def _cfg(args) -> RunConfig:
    return RunConfig(
        tol=args.tol,
        flow_tol=getattr(args, "flow_tol", DEFAULT_FLOW_TOL),
        max_iter=getattr(args, "max_iter", DEFAULT_MAX_ITER),
    )


def cmd_classify(args) -> int:
    _emit(asdict(classify_type(args.p, args.q)), args.out, timestamp=False)
    return EXIT_OK


def cmd_sample(args) -> int:
    C = sample_tuple(args.p, args.q, args.seed, args.distribution)
    if args.out:
        write_tuple(C, args.out)
    else:
        sys.stdout.write(json.dumps(tuple_to_json(C), indent=1) + "\n")
    return EXIT_OK


def cmd_analyze(args) -> int:
    C = read_tuple(args.input)
    report = analyze_tuple(C, tol=args.tol, exact=args.exact)
    _emit(report, args.out)
    return EXIT_OK


def _flow_report(args) -> tuple[dict, int]:
    C = read_tuple(args.input)
    Cf = C.to_float()
    a = build_algebra(Cf)
    f = minimal_vector_flow(Cf, step=args.step, max_iter=args.max_iter, tol=args.flow_tol)
    report: dict = {"input": {"p": C.p, "q": C.q, "mode": C.mode}, "flow": f.to_json()}
    if not f.certified:
        report["certificate"] = None
        return report, EXIT_FAIL
    der = derivation_algebra(a, "float", args.tol)
    cert = certify_and_extract(Cf, f, a, der)
    report["certificate"] = cert.to_json()
    report["checks"] = flow_checks(f, cert)
    report["certified"] = cert.residual < SOLITON_TOL
    return report, EXIT_OK if report["certified"] else EXIT_FAIL


def cmd_flow(args) -> int:
    report, code = _flow_report(args)
    _emit(report, args.out)
    return code


def cmd_soliton(args) -> int:
    report, code = _flow_report(args)
    flow = report["flow"]
    _emit(
        {
            "input": report["input"],
            "certificate": report["certificate"],
            "certified": report.get("certified", False),
            "flow": {k: flow[k] for k in ("status", "iterations", "final_moment_norm", "scale")},
        },
        args.out,
    )
    return code


def cmd_survey(args) -> int:
    report = survey(args.p, args.q, args.samples, args.seed, _cfg(args), args.workers)
    if not args.records:
        report.pop("records")
    _emit(report, args.out, timestamp=not args.no_timestamp)
    if args.csv:
        path = Path(args.csv)
        new = not path.exists()
        with path.open("a", newline="") as fh:
            if new:
                fh.write(f"# {SURVEY_CSV_VERSION}\n")
            writer = csv.DictWriter(fh, fieldnames=SURVEY_CSV_COLUMNS)
            if new:
                writer.writeheader()
            writer.writerow(survey_csv_row(report))
    return EXIT_OK


def cmd_verify(args) -> int:
    p, q = args.type
    report = verify_counterexample(args.samples, args.seed, p, q, args.exact_samples, _cfg(args), args.workers)
    if not args.records:
        report["records"] = [r for r in report["records"] if not r["passed"]]
        report["exact_records"] = [r for r in report["exact_records"] if not r["passed"]]
        report.pop("failures")
    _emit(report, args.out, timestamp=not args.no_timestamp)
    summary = f"verify-counterexample ({p},{q}): {report['overall']} " f"[{report['passed_samples']}/{report['samples']} float, " f"{report['passed_exact_samples']}/{report['exact_samples']} exact]"
    print(summary, file=sys.stderr)
    return EXIT_OK if report["overall"] == "pass" else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nilsoliton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, flow=False):
        sp.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL, help="relative rank tolerance")
        sp.add_argument("--out", help="write JSON here instead of stdout")
        if flow:
            sp.add_argument("--flow-tol", type=float, default=DEFAULT_FLOW_TOL)
            sp.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)

    sp = sub.add_parser("classify", help="exceptional-type classification of (p, q)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("sample", help="write a seeded random tuple file")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--distribution", choices=("gaussian", "rational-lattice"), default="gaussian")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("analyze", help="derivations, stabilizers and ideal checks of a tuple file")
    sp.add_argument("input")
    sp.add_argument("--exact", action="store_true", help="also compute dimensions in exact rational arithmetic")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    for name, func in (("flow", cmd_flow), ("soliton", cmd_soliton)):
        sp = sub.add_parser(name, help="minimal-vector flow and soliton certificate")
        sp.add_argument("input")
        sp.add_argument("--step", type=float, default=None)
        common(sp, flow=True)
        sp.set_defaults(func=func)

    for name, func in (("survey", cmd_survey), ("verify-counterexample", cmd_verify)):
        sp = sub.add_parser(name)
        if name == "survey":
            sp.add_argument("--p", type=int, required=True)
            sp.add_argument("--q", type=int, required=True)
            sp.add_argument("--samples", type=int, default=100)
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--csv", help="append one row to this CSV file")
        else:
            sp.add_argument("--samples", type=int, default=100)
            sp.add_argument("--seed", type=int, default=42)
            sp.add_argument("--type", type=_type_arg, default=(4, 5), help="override type as 'p,q'")
            sp.add_argument("--exact-samples", type=int, default=10)
        sp.add_argument("--workers", type=int, default=None, help="worker processes (env NILSOLITON_WORKERS)")
        sp.add_argument("--records", action="store_true", help="include every per-sample record")
        sp.add_argument("--no-timestamp", action="store_true")
        common(sp, flow=True)
        sp.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
