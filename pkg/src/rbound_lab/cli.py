"""Command line front end.

    rbound-lab <kind> --config path.json [--seed N] [--format json|csv] [--out path]
    rbound-lab verify-all [--quick] [--out report.json]

Errors are printed to stderr as a JSON object ``{"error": {"code", "message", "field_path"}}``
and the exit status is nonzero.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import KINDS, load_config
from .errors import ConfigError, RBoundLabError
from .report import emit_report, to_canonical_json

EXIT_ERROR = 2
EXIT_FAILED = 1


def _error_report(exc: Exception) -> str:
    if isinstance(exc, RBoundLabError):
        err = {"code": exc.code, "message": str(exc)}
        if isinstance(exc, ConfigError):
            err["field_path"] = [str(p) for p in exc.field_path]
    else:
        err = {"code": "internal-error", "message": f"{type(exc).__name__}: {exc}"}
    return to_canonical_json({"error": err})


def _write(data: bytes, out: str | None):
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def cmd_run(args) -> int:
    from .experiments import run_experiment

    cfg, params = load_config(args.config, args.kind, args.seed)
    report = run_experiment(cfg, params)
    _write(emit_report(report, args.format), args.out or cfg.output)
    return 0


def cmd_verify_all(args) -> int:
    from .acceptance import run_all, summary

    results = run_all(quick=args.quick)
    print(f"{'id':>3}  {'criterion':<52} {'result':<6} {'time':>9}  limit")
    for r in results:
        status = "pass" if r.passed else "FAIL"
        slow = "" if r.in_time else "  (over limit)"
        print(f"{r.id:>3}  {r.name:<52} {status:<6} {r.seconds:8.2f}s  {r.limit_s:g}s{slow}")
    ok = all(r.passed and r.in_time for r in results)
    print("all criteria passed" if ok else "some criteria failed")
    if args.out:
        Path(args.out).write_bytes(emit_report(summary(results, args.quick)))
    return 0 if ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbound-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.set_defaults(func=cmd_run, kind=kind)
    v = sub.add_parser("verify-all", help="run the acceptance suite")
    v.add_argument("--quick", action="store_true", help="smaller trial counts, same tolerances")
    v.add_argument("--out", default=None, help="write the JSON pass/fail report here")
    v.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RBoundLabError as exc:
        sys.stderr.write(_error_report(exc))
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - the CLI contract is a structured report
        sys.stderr.write(_error_report(exc))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
