"""Command line: ``fwkit run | list | selftest``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 1 any other
library error.
"""
from __future__ import annotations

import argparse
import sys

from .core import ConfigError, FwkitError, NumericFailure
from .experiments import list_experiments, resolve_config, run_experiment

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _overrides(args) -> dict:
    from .experiments import parse_value
    out = {}
    if args.seed is not None:
        out["seeds"] = [args.seed]
    if args.max_iters is not None:
        out["max_iters"] = args.max_iters
    if args.tol is not None:
        out["tol"] = args.tol
    if args.out is not None:
        out["out"] = args.out
    if args.timing:
        out["timing"] = True
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_value(v)
    return out


def cmd_run(args) -> int:
    cfg = resolve_config(args.experiment, _overrides(args))
    _, summary = run_experiment(cfg)
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_list(args) -> int:
    for name, desc in list_experiments():
        print(name if args.names else f"{name:24s} {desc}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import run_all
    ok = True
    for line, passed in run_all(quick=not args.full):
        print(line)
        ok &= passed
    return EXIT_OK if ok else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fwkit", description="Frank-Wolfe experiments and self-checks")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    r = sub.add_parser("run", help="run a built-in experiment or a config file")
    r.add_argument("experiment", help="built-in name or path to a key=value config file")
    r.add_argument("--seed", type=int)
    r.add_argument("--max-iters", type=int, dest="max_iters")
    r.add_argument("--tol", type=float)
    r.add_argument("--out")
    r.add_argument("--timing", action="store_true",
                   help="record wall-clock time in traces (breaks byte-identical reruns)")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", help="list built-in experiments")
    ls.add_argument("--names", action="store_true", help="one name per line")
    ls.set_defaults(func=cmd_list)
    st = sub.add_parser("selftest", help="run the acceptance checks")
    st.add_argument("--full", action="store_true", help="use the full-size instances")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        return cmd_list(argparse.Namespace(names=False))
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fwkit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"fwkit: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FwkitError as exc:
        print(f"fwkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
