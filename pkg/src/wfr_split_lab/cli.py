"""Command line entry point.

Usage::

    wfr-split-lab <experiment> [--config PATH] [--out PATH] [--json]
                  [--threads N] [--suite NAME] [key=value ...]

Experiments: figure1, figure2, figure3, figure4, ratio, grid-demo,
validate.  Exit codes: 0 success, 1 validation failure, 2 configuration
error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import config as cfgmod
from . import experiments, validate
from .errors import ConfigError, WfrLabError

_COMMANDS = sorted([*experiments.EXPERIMENTS, "validate"])


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfr-split-lab",
        description="Gaussian flow splittings, decay bounds, and grid experiments",
    )
    parser.add_argument("experiment", choices=_COMMANDS)
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--out", default="-", help="output path, '-' for stdout")
    parser.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel parameter points (deterministic ordering)")
    parser.add_argument("--suite", action="append",
                        help="validate: run only the named suite (repeatable)")
    parser.add_argument("overrides", nargs="*", metavar="key=value",
                        help="config overrides")
    return parser


def _parse_args(parser: argparse.ArgumentParser, argv):
    # key=value overrides may be interleaved with options; collect leftovers
    args, extra = parser.parse_known_args(argv)
    for item in extra:
        if item.startswith("-") or "=" not in item:
            parser.error(f"unrecognized argument: {item}")
    args.overrides = [*args.overrides, *extra]
    return args


def _fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_text(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _result_csv(result: experiments.ExperimentResult) -> str:
    lines = [
        f"# {key} = {cfgmod.format_value(val) if not isinstance(val, str) else val}"
        for key, val in sorted(result.metadata.items())
    ]
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(_fmt_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def _result_json(result: experiments.ExperimentResult) -> str:
    payload = {
        "metadata": result.metadata,
        "columns": result.columns,
        "rows": result.rows,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _run_experiment(args) -> int:
    defaults, runner = experiments.EXPERIMENTS[args.experiment]
    cfg = cfgmod.load_config(args.config) if args.config else {}
    cfg = cfgmod.apply_overrides(cfg, args.overrides)
    cfg = cfgmod.resolve(defaults, cfg, args.experiment)
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    result = runner(cfg, threads=args.threads)
    text = _result_json(result) if args.json else _result_csv(result)
    _write_text(args.out, text)
    return 0


def _run_validate(args) -> int:
    names = None
    if args.suite:
        for name in args.suite:
            if name not in validate.SUITES:
                raise ConfigError(
                    f"unknown suite {name!r} (known: {', '.join(sorted(validate.SUITES))})"
                )
        names = args.suite
    results = validate.run_suites(names)
    failed = [r for r in results if not r.passed]
    if args.json:
        payload = {
            "checks": [
                {
                    "suite": r.suite,
                    "name": r.name,
                    "value": r.value,
                    "threshold": r.threshold,
                    "passed": r.passed,
                }
                for r in results
            ],
            "passed": not failed,
        }
        _write_text(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        lines = [r.line for r in results]
        lines.append(f"{len(results) - len(failed)}/{len(results)} checks passed")
        _write_text(args.out, "\n".join(lines) + "\n")
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = _parse_args(parser, argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage already; normalize other codes
        return 2 if exc.code not in (0,) else 0
    try:
        if args.experiment == "validate":
            return _run_validate(args)
        return _run_experiment(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except WfrLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
