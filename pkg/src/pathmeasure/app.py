from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Ensure package root is in sys.path for direct script execution
_this_file = Path(__file__).resolve()
_project_root = _this_file.parents[2]
_src_dir = _project_root / "src"
if _src_dir.is_dir() and str(_src_dir) not in sys.path:
    sys.path.insert(0, str(_src_dir))

from pathmeasure.app_controller import ExperimentController
from pathmeasure.core.errors import ConfigError, DomainError, NumericalError
from pathmeasure.core.model import Command

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathmeasure",
        description="Cylinder integrals over path space, Feynman limits and radial Bessel propagators.",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", type=Path, required=True, help="flat 'key = value' experiment file")
    parser.add_argument("--out", type=Path, default=Path("out"), help="directory for result.csv and summaries")
    parser.add_argument("--strict", action="store_true", help="exit 4 when a Feynman limit did not converge")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log every step")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")
    return parser


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(format="[%(module)-12s] %(message)s", level=level, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    controller = ExperimentController()

    try:
        controller.open_config(args.config, args.command)
    except ConfigError as e:
        for message in e.messages:
            logger.error("%s: %s", args.config, message)
        return EXIT_CONFIG

    try:
        table = controller.run()
    except NumericalError as e:
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERICAL
    except DomainError as e:
        logger.error("%s: %s", args.config, e)
        return EXIT_CONFIG

    paths = controller.export(args.out)
    logger.info("wrote %s", ", ".join(str(p) for p in paths.values()))

    if args.strict and table.converged is False:
        logger.error("not converged (tolerance %s)", table.summary.get("tolerance"))
        return EXIT_NOT_CONVERGED
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
