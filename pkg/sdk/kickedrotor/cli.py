#!/usr/bin/env python3
"""
Command line entry point.

    kickedrotor simulate|sweep-resonance|sweep-kappa|classical|verify --config run.json
        [--out DIR] [--seed N] [--method split|direct]
        [--convention standard|literal-eq3] [--reverse-blocks]

Exit codes: 0 success, 1 config error, 2 numerical-quality failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import NoReturn, Optional, Sequence

from .config import WORKERS, log
from .exceptions import ConfigError, NumericalError, VerificationError
from .runner import COMMANDS, RunConfig, RunManifest, cmd_verify, load_config, require_passed, with_overrides

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

COMMAND_NAMES = ("simulate", "sweep-resonance", "sweep-kappa", "classical", "verify")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise ConfigError(message, "argv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kickedrotor", description="Resonant quantum kicked rotor simulator")
    parser.add_argument("command", choices=COMMAND_NAMES)
    parser.add_argument("--config", help="Path to a JSON run config")
    parser.add_argument("--from-manifest", help="Replay the resolved config stored in a manifest.json")
    parser.add_argument("--out", help="Output directory (overrides the config's output)")
    parser.add_argument("--seed", type=int, help="Seed for random sequences and classical ensembles")
    parser.add_argument("--method", choices=["split", "direct"], help="Propagator implementation")
    parser.add_argument("--convention", choices=["standard", "literal-eq3"], help="Free-phase convention")
    parser.add_argument("--reverse-blocks", action="store_true", help="Apply Fibonacci blocks in operator order")
    parser.add_argument("--workers", type=int, default=WORKERS, help=f"Worker processes (default: {WORKERS})")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.config and args.from_manifest:
        raise ConfigError("use either --config or --from-manifest", "argv")
    if args.from_manifest:
        config = RunConfig.from_dict(RunManifest.load(args.from_manifest).config)
    elif args.config:
        config = load_config(args.config)
    else:
        config = RunConfig()
    return with_overrides(
        config,
        experiment=args.command.replace("-", "_"),
        output=args.out,
        seed=args.seed,
        method=args.method,
        convention=args.convention.replace("-", "_") if args.convention else None,
        reverse_blocks=True if args.reverse_blocks else None,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = resolve_config(args)
        if config.experiment == "verify":
            report = cmd_verify(config.convention)
            print(json.dumps(report, indent=2))
            require_passed(report)
            return EXIT_OK
        manifest = COMMANDS[config.experiment](config, max(1, args.workers))
        print(manifest.parent)
        return EXIT_OK
    except ConfigError as exc:
        where = f" ({exc.field})" if exc.field else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except VerificationError as exc:
        log(f"verify_failed checks={','.join(exc.failed)}")
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    raise SystemExit(main())
