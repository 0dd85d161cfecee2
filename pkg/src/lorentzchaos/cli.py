"""Command-line entry point: ``analyze``, ``orbit``, ``norm`` and ``verify``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .operators import orbit_trace
from .report import (
    _need_vector,
    _operator,
    dumps,
    export_orbit_csv,
    has_precondition_failure,
    norm_table,
    run,
    verify,
)
from .verdict import PreconditionError, jsonable

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_PRECONDITION = 3
EXIT_MISMATCH = 4


def _emit(text: str, path):
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    report = run(cfg)
    _emit(dumps(report), args.out or cfg.report_path)
    return EXIT_PRECONDITION if has_precondition_failure(report) else EXIT_OK


def cmd_orbit(args) -> int:
    cfg = load_config(args.config)
    path = args.csv or cfg.csv_path
    if not path:
        raise ConfigError("no CSV path: pass --csv or set output.orbit_csv")
    try:
        trace = orbit_trace(_operator(cfg), _need_vector(cfg), cfg.indices[0], cfg.horizon)
    except (PreconditionError, ValueError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    export_orbit_csv(trace, path)
    print(f"wrote {len(trace.entries)} rows to {path}")
    return EXIT_OK


def cmd_norm(args) -> int:
    cfg = load_config(args.config)
    _emit(json.dumps(jsonable(norm_table(cfg)), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"report is not valid JSON: {exc}") from None
    failures = verify(report)
    for f in failures:
        print(f"MISMATCH {f}")
    if failures:
        return EXIT_MISMATCH
    print("all evidence replayed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lorentzchaos", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", help="run the analyses listed in a config")
    p.add_argument("config")
    p.add_argument("--out", help="report path (default: config output.report, else stdout)")
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("orbit", help="write the orbit trace of the config vector as CSV")
    p.add_argument("config")
    p.add_argument("--csv", help="CSV path (default: config output.orbit_csv)")
    p.set_defaults(func=cmd_orbit)
    p = sub.add_parser("norm", help="Lorentz norms of the config vector")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_norm)
    p = sub.add_parser("verify", help="replay every witness in a report")
    p.add_argument("report")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
