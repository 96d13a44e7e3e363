"""Command line interface: ``pqwalk run|list-patterns|validate <config>``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .graph import PatternCapExceeded
from .realistic import SignalExtinctionError
from .runner import list_patterns, run

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pqwalk", description="Quantum walks on dynamical percolation graphs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "simulate and write result files"),
        ("list-patterns", "print every configuration pattern with its probability"),
        ("validate", "check a config file"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="JSON run configuration")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--output-dir", default=None)
        sp.add_argument("--mode", choices=("ideal", "realistic", "errorbars"), default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {"seed": args.seed, "output_dir": args.output_dir, "mode": args.mode}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "validate":
            print(f"{args.config}: OK")
        elif args.command == "list-patterns":
            list_patterns(cfg, sys.stdout)
        else:
            meta = run(cfg)
            logging.getLogger("pqwalk").info("run complete: %s", ", ".join(meta["files"]))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PatternCapExceeded as exc:
        print(f"error: {exc} (set \"pattern_samples\" in the config to sample patterns)", file=sys.stderr)
        return EXIT_CAP
    except SignalExtinctionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
