"""Command line interface.

    semilab run <experiment_id> [--config path] [--out dir] [--seed N]
                                [--format csv|json]
    semilab list

Exit codes: 0 pass, 1 fail (an inequality was violated), 2 usage or config
error, 3 numeric or accuracy error.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    GrowthError,
    RangeError,
    SemilabError,
)
from . import REGISTRY, ExperimentConfig, emit, run

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semilab",
        description="Numerical experiments on Markov semigroup kernels and their tail bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("experiment_id", help="registered experiment name (see `semilab list`)")
    p_run.add_argument("--config", help="JSON config file; defaults apply when omitted")
    p_run.add_argument("--out", help="output directory (default: ./results)")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--format", choices=("csv", "json"), default="csv")

    sub.add_parser("list", help="print the experiment registry")
    return parser


def _cmd_list() -> int:
    width = max(len(name) for name in REGISTRY)
    for name in sorted(REGISTRY):
        print(f"{name:<{width}}  {REGISTRY[name].claim}")
    return EXIT_PASS


def _cmd_run(args: argparse.Namespace) -> int:
    if args.config:
        config = ExperimentConfig.from_json(args.config)
        if config.experiment_id != args.experiment_id:
            raise ConfigError(
                f"config names {config.experiment_id!r} but the command line "
                f"asked for {args.experiment_id!r}"
            )
    else:
        config = ExperimentConfig(experiment_id=args.experiment_id)
    if args.seed is not None:
        config.seed = args.seed
    out_dir = args.out or config.output_dir or "results"

    result = run(config)
    written = emit(result, out_dir, fmt=args.format)
    summary = {
        "experiment": result.experiment_id,
        "verdict": result.verdict,
        "rows": len(result.rows),
        "files": written,
    }
    print(json.dumps(summary, indent=1))
    return result.exit_code


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        return _cmd_run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AccuracyError, GrowthError, RangeError, DomainError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SemilabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
