"""Command-line front end.

Subcommands: ``simulate`` writes replicate paths as CSV, ``estimate`` runs
the full pipeline and writes a run record, ``validate`` executes named
validation suites, ``asymptotics`` samples the scaled limiting law.

Exit codes: 0 success, 1 validation failure, 2 usage or configuration
error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .experiments import ConfigError, ExperimentConfig, run_asymptotics, run_estimate, run_simulate
from .suites import available_suites, run_suite

USAGE_ERROR = 2
VALIDATION_FAILURE = 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statcare",
        description="Simulate stationary models and estimate their parameter matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--reps", type=int, help="override the replicate count")
    common.add_argument("--jobs", type=int, default=1, help="concurrent replicate workers")

    sub.add_parser("simulate", parents=[common], help="write replicate path CSVs")
    est = sub.add_parser("estimate", parents=[common], help="run the estimation pipeline")
    est.add_argument("--paths", help="directory of a previous simulate run to reuse")
    sub.add_parser("asymptotics", parents=[common], help="sample the scaled limiting law")

    val = sub.add_parser("validate", parents=[common], help="run validation suites")
    val.add_argument("suite", nargs="?", help="suite name, or 'all'")
    return parser


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    config = ExperimentConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.out is not None:
        overrides["output_dir"] = args.out
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _cmd_simulate(args) -> int:
    config = _load_config(args)
    manifest = run_simulate(config, config.output_dir, jobs=args.jobs)
    print(f"wrote {len(manifest['files'])} paths to {config.output_dir}")
    return 0


def _cmd_estimate(args) -> int:
    config = _load_config(args)
    record = run_estimate(config, config.output_dir, jobs=args.jobs, paths_dir=args.paths)
    print(json.dumps(record.aggregates, indent=2))
    return 0


def _cmd_asymptotics(args) -> int:
    config = _load_config(args)
    summary = run_asymptotics(config, config.output_dir, jobs=args.jobs)
    print(json.dumps({k: summary[k] for k in ("horizon", "rate", "r_squared")}, indent=2))
    return 0


def _cmd_validate(args) -> int:
    if args.suite:
        names = available_suites() if args.suite == "all" else [args.suite]
    elif args.config:
        names = list(_load_config(args).checks)
        if not names:
            raise ConfigError("config lists no checks")
    else:
        raise ConfigError(
            f"give a suite name or a config; available: {', '.join(available_suites())}"
        )
    all_passed = True
    report = []
    for name in names:
        try:
            result = run_suite(name)
        except KeyError as exc:
            print(str(exc.args[0]), file=sys.stderr)
            return USAGE_ERROR
        report.append(result.to_dict())
        all_passed &= result.passed
        worst = min((c.margin for c in result.checks), default=float("inf"))
        status = "pass" if result.passed else "FAIL"
        print(f"{status}  {name}  (worst margin {worst:.3g})")
    if args.out:
        from pathlib import Path as FsPath

        FsPath(args.out).mkdir(parents=True, exist_ok=True)
        (FsPath(args.out) / "validation_report.json").write_text(
            json.dumps(report, indent=2) + "\n", encoding="utf-8"
        )
    return 0 if all_passed else VALIDATION_FAILURE


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "estimate": _cmd_estimate,
        "asymptotics": _cmd_asymptotics,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
