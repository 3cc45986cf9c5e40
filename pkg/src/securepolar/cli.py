"""Command-line entry point: ``securepolar {construct,bounds,simulate,rate-calc}``.

Exit codes: 0 on success, 2 for configuration errors, 3 for runtime errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, ExperimentConfig, load_config
from .experiments import COMMANDS
from .schemes import SchemeKind

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value experiment file")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=_u64, metavar="U64", help="override the seed")
    common.add_argument("--threads", type=_positive, metavar="K", help="worker threads")
    common.add_argument("--scheme", choices=[k.value for k in SchemeKind])
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="securepolar",
        description="Secure polar coding over erasure wiretap channels with delayed CSI.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "construct": "write per-state partitions (and B_add for the strong scheme)",
        "bounds": "sweep the (N, beta) grid of reliability, leakage and rate bounds",
        "simulate": "Monte Carlo chained transmissions with Bob and Eve BER",
        "rate-calc": "rate lost by chaining over all unreliable indices versus B' only",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        "out": args.out,
        "threads": args.threads,
        "scheme": SchemeKind(args.scheme) if args.scheme else None,
    }
    if args.seed is not None:
        overrides.update(seed=args.seed, seeds=())
    if args.config:
        return load_config(args.config, **overrides)
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        written = COMMANDS[args.command](cfg, cfg.out)
    except (OSError, ValueError, RuntimeError, ArithmeticError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
