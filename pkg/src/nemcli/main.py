# src/nemcli/main.py
"""
nemcli: command-line front end of nemengine.

    nemcli run-flow --preset fig6-left
    nemcli sweep-sectors --preset table1 --workers 4
    nemcli constant-analysis --preset fig3
    nemcli threshold --preset threshold
    nemcli export --initial-kind file --initial-file out/field.csv

Every RunConfig key is a flag (--n-theta, --h-phi, ...) and a config-file key.
Exit status: 0 success, 2 invalid input, 3 numerical contract violation, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
from typing import Callable, Sequence

from pydantic.fields import FieldInfo

from nemengine import __version__
from nemengine.config import OUTPUT_DIR_ENV, PRESETS, RunConfig, build_config
from nemengine.errors import NumericalContractError
from nemengine.simulate import run_constant_analysis, run_export, run_sector_sweep, run_single, run_threshold

logger = logging.getLogger("nemcli")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

COMMANDS: dict[str, tuple[Callable, str]] = {
    "run-flow": (run_single, "relax one datum by the gradient flow"),
    "sweep-sectors": (run_sector_sweep, "minimum energy per winding sector"),
    "constant-analysis": (run_constant_analysis, "closed-form energy, critical angles and bifurcations of constant states"),
    "threshold": (run_threshold, "bisection for the aspect ratio where the parallel state stops being the minimizer"),
    "export": (run_export, "director field CSV of a datum or saved field"),
}


def _field_help(name: str, info: FieldInfo) -> str:
    if name == "output_dir":
        return f"output directory (default: ${OUTPUT_DIR_ENV} or nem-out)"
    return f"default: {info.default}"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
    common.add_argument("--config", metavar="FILE", help="flat key = value config file")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    group = common.add_argument_group("run configuration")
    for name, info in RunConfig.model_fields.items():
        group.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None, metavar="VALUE",
                           help=_field_help(name, info))

    parser = argparse.ArgumentParser(prog="nemcli", description="Nematic director fields on a torus.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, (_, text) in COMMANDS.items():
        sub.add_parser(command, parents=[common], help=text, description=text, allow_abbrev=False)
    return parser


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    overrides = {name: getattr(args, name) for name in RunConfig.model_fields}
    handler, _ = COMMANDS[args.command]
    try:
        config = build_config(args.preset, args.config, overrides)
        logger.debug("config %s: %s", config.config_hash(), config.echo())
        handler(config)
    except NumericalContractError as exc:
        logger.error("%s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except ValueError as exc:
        logger.error("%s", exc)
        return EXIT_INVALID
    return EXIT_OK
