"""Command-line interface: ``resonance-cli <task> [--config PATH] [--out DIR] ...``."""

import argparse
import json
import logging
import sys
from collections.abc import Sequence

from .config import RunConfig, default_run_config, get_solver_settings, load_run_config
from .errors import ConfigError, ResonanceError
from .runner import cli_run

logger = logging.getLogger(__name__)

SUBCOMMANDS = {
    "resonances": "resonances",
    "polarization": "polarization",
    "sweep": "sweep",
    "validate": "validate",
    "oracle-disk": "oracle",
}

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resonance-cli",
        description="Scattering resonances of bodies with small anisotropic inclusions.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, task in SUBCOMMANDS.items():
        sub = subparsers.add_parser(name, help=f"run the {task} task")
        sub.add_argument("--config", type=str, default=None, help="run configuration JSON (bundled scene if omitted)")
        sub.add_argument("--out", type=str, default=None, help="output directory for CSV artifacts")
        sub.add_argument("--seed", type=int, default=None, help="seed of the probe generator")
        sub.add_argument("--threads", type=int, default=None, help="worker threads (speed only)")
        sub.add_argument("--debug", action="store_true", help="enable debug logging")
    return parser


def _report(error: ResonanceError) -> int:
    print(json.dumps(error.to_report(), sort_keys=True), file=sys.stderr)
    return error.exit_code


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file (or bundled default) with the command-line overrides applied.

    Raises:
        ConfigError: On malformed files, environment values or flags.
    """
    task = SUBCOMMANDS[args.command]
    if args.seed is not None and args.seed < 0:
        raise ConfigError("--seed must be non-negative", field="--seed")
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads must be >= 1", field="--threads")
    if args.config:
        config = load_run_config(args.config)
        if config.task != task:
            logger.info("Config task %r overridden by subcommand %r", config.task, task)
    else:
        config = default_run_config(task, get_solver_settings())
    return config.with_overrides(task=task, seed=args.seed, threads=args.threads, output_dir=args.out)


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of ``resonance-cli``; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.debug else logging.INFO, format=LOG_FORMAT)
    try:
        config = resolve_config(args)
        if not args.debug and get_solver_settings().debug:
            logging.getLogger().setLevel(logging.DEBUG)
    except ResonanceError as e:
        return _report(e)
    except Exception as e:
        logger.exception("Unexpected %s while resolving the configuration", type(e).__name__)
        return _report(ResonanceError(f"Unexpected {type(e).__name__}: {e}", exception=type(e).__name__))
    return cli_run(config)


if __name__ == "__main__":
    sys.exit(main())
