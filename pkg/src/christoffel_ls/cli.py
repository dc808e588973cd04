"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ChristoffelLSError
from .experiments import ExperimentConfig, run_conditioning_sweep, run_sweep
from .plots import STYLES, emit_plots
from .validation import SUITES, run_suite

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _load(args) -> tuple[ExperimentConfig, Path]:
    cfg = ExperimentConfig.from_json(args.config)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    if changes:
        cfg = cfg.replace(**changes)
    out = Path(cfg.out)
    if args.out is not None:
        out = Path(args.out) / out.name
    return cfg, out


def _cmd_sweep(args) -> int:
    cfg, out = _load(args)
    res = run_sweep(cfg, out)
    print(f"wrote {res.csv_path} ({len(res.rows)} rows, {res.summary['failed_rows']} failed)")
    return EXIT_OK


def _cmd_conditioning(args) -> int:
    cfg, out = _load(args)
    res = run_conditioning_sweep(cfg, out)
    print(f"wrote {res.csv_path} ({len(res.rows)} rows, {res.summary['failed_rows']} failed)")
    return EXIT_OK


def _cmd_validate(args) -> int:
    names = SUITES if args.suite == "all" else [args.suite]
    ok = True
    reports = []
    for name in names:
        rep = run_suite(name, seed=args.seed)
        reports.append(rep.to_dict())
        ok &= rep.passed
        print(f"{'PASS' if rep.passed else 'FAIL'} {name} ({rep.seconds:.1f}s)", file=sys.stderr)
    print(json.dumps(reports if len(reports) > 1 else reports[0], indent=2))
    return EXIT_OK if ok else EXIT_VALIDATION


def _cmd_plot(args) -> int:
    for path in emit_plots(args.csv, args.style, args.out):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="christoffel-ls", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress and warnings")
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (
        ("sweep", _cmd_sweep, "error/stability sweep over a schedule of spaces"),
        ("conditioning", _cmd_conditioning, "stability-constant sweep (target optional)"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="JSON experiment config")
        s.add_argument("--seed", type=int, help="override the config seed")
        s.add_argument("--trials", type=int, help="override the number of trials")
        s.add_argument("--out", help="directory for the CSV (file name taken from the config)")
        s.set_defaults(func=fn)

    v = sub.add_parser("validate", help="run a self-check suite")
    v.add_argument("--suite", required=True, choices=SUITES + ("all",))
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=_cmd_validate)

    pl = sub.add_parser("plot", help="write gnuplot scripts for a results CSV")
    pl.add_argument("--csv", required=True)
    pl.add_argument("--style", required=True, choices=STYLES)
    pl.add_argument("--out", help="output directory (default: next to the CSV)")
    pl.set_defaults(func=_cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ChristoffelLSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
