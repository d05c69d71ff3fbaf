"""Command-line entry point: `gdm run|baseline|augment|gradcheck|export`.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from .config import ExperimentConfig, build_config
from .errors import (
    CheckpointError,
    ConfigError,
    ContractViolation,
    DatasetError,
    KernelUsageError,
    NumericError,
)
from .kernel.gradcheck import DEFAULT_TOLERANCE, run_gradcheck_suite
from .pipeline import augment_dataset, load_dataset, run_experiment
from .tu_format import export_tu_dataset

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class UsageError(Exception):
    """Raised instead of exiting when command-line parsing fails."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_experiment_options(parser: argparse.ArgumentParser) -> None:
    """Flags mirroring ExperimentConfig keys; unset flags stay None so config files apply."""
    data = parser.add_argument_group("dataset")
    data.add_argument("--config", type=Path, help="config file (key = value text or YAML)")
    data.add_argument("--dataset-root", type=Path, help="directory with TU-format files")
    data.add_argument("--dataset", help="TU dataset name")
    data.add_argument("--synthetic", choices=["rings-stars", "er-density"], help="use a built-in synthetic dataset")
    data.add_argument("--synthetic-per-class", type=int)
    data.add_argument("--out-dir", type=Path)
    data.add_argument("--seed", type=int)

    protocol = parser.add_argument_group("protocol")
    protocol.add_argument("--labels-per-class", type=int)
    protocol.add_argument("--folds", type=int)
    protocol.add_argument("--repeats", type=int)
    protocol.add_argument("--workers", type=int)

    model = parser.add_argument_group("model and training")
    model.add_argument("--readout", choices=["mean", "add", "max"])
    model.add_argument("--hidden-dim", type=int)
    model.add_argument("--num-layers", type=int)
    model.add_argument("--embedding-dim", type=int)
    model.add_argument("--epochs-pretrain", type=int)
    model.add_argument("--epochs-main", type=int)
    model.add_argument("--epochs-gsae", type=int)
    model.add_argument("--lr", type=float)
    model.add_argument("--loss-reduction", choices=["mean", "sum"])
    model.add_argument("--fixed-negatives", action="store_const", const=True, help="sample GSAE negatives once")
    model.add_argument("--log-every", type=int)

    mixup = parser.add_argument_group("augmentation")
    mixup.add_argument("--policy", choices=["acc", "unc", "rand"])
    mixup.add_argument("--no-low", action="store_const", const=True, help="skip the low-difficulty subset")
    mixup.add_argument("--no-med", action="store_const", const=True, help="skip the medium-difficulty subset")
    mixup.add_argument("--no-high", action="store_const", const=True, help="skip the high-difficulty subset")
    mixup.add_argument("--aug-multiplier", type=float, help="generated graphs per subset, as a multiple of N")
    mixup.add_argument("--lambda-gdm", type=float, help="weight of the generated-graph loss")
    mixup.add_argument("--alpha", type=float)
    mixup.add_argument("--beta", type=float)
    mixup.add_argument("--epsilon", type=float, help="pruning threshold of decoded edges")
    mixup.add_argument("--binarize", dest="binarize", action="store_const", const=True)
    mixup.add_argument("--no-binarize", dest="binarize", action="store_const", const=False)
    mixup.add_argument("--keep-isolated", dest="keep_isolated", action="store_const", const=True)
    mixup.add_argument("--drop-isolated", dest="keep_isolated", action="store_const", const=False)
    mixup.add_argument("--save-checkpoints", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="gdm", description="Graph dual mixup for low-label graph classification")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
        ("run", "k-fold low-label experiment with augmentation"),
        ("baseline", "k-fold low-label experiment without augmentation"),
        ("augment", "generate a mixup set from a dataset and export it"),
        ("export", "re-serialize a dataset in TU layout"),
    ]:
        command = commands.add_parser(name, help=help_text)
        _add_experiment_options(command)
        if name == "export":
            command.add_argument("--name", help="file prefix of the exported dataset")

    gradcheck = commands.add_parser("gradcheck", help="finite-difference check of every kernel gradient")
    gradcheck.add_argument("--seed", type=int, default=0)
    gradcheck.add_argument("--instances", type=int, default=10)
    gradcheck.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    return parser


_NON_CONFIG_KEYS = {"command", "config", "verbose", "quiet", "name"}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides: dict[str, Any] = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG_KEYS}
    return build_config(args.config, overrides)


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _run(args: argparse.Namespace) -> int:
    if args.command == "gradcheck":
        results = run_gradcheck_suite(args.seed, args.instances, args.tolerance)
        failed = [result for result in results if not result.passed]
        worst = max((result.max_rel_error for result in results), default=0.0)
        print(f"gradcheck: {len(results) - len(failed)}/{len(results)} passed, max rel. error {worst:.2e}")
        for result in failed:
            print(f"  FAILED {result.name} (instance {result.instance}): {result.max_rel_error:.2e}")
        return EXIT_NUMERIC if failed else EXIT_OK

    cfg = config_from_args(args)
    if args.command in ("run", "baseline"):
        result = run_experiment(cfg, baseline=args.command == "baseline")
        print(result.summary().format_banner_line())
        print(f"results written to {cfg.out_dir}")
    elif args.command == "augment":
        outcome = augment_dataset(cfg)
        print(f"generated {len(outcome.generated)} graphs into {cfg.out_dir}")
    elif args.command == "export":
        dataset = load_dataset(cfg)
        written = export_tu_dataset(dataset, cfg.out_dir, args.name)
        print(f"exported {len(dataset)} graphs ({len(written)} files) to {cfg.out_dir}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """Parse `argv`, run the command and map errors to exit codes."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    _configure_logging(args)

    try:
        return _run(args)
    except (ConfigError, ContractViolation) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (DatasetError, CheckpointError, OSError) as e:
        logger.error(str(e))
        return EXIT_DATA
    except (NumericError, KernelUsageError) as e:
        logger.error(f"Numeric failure: {e}")
        return EXIT_NUMERIC


__all__ = ["main", "build_parser", "config_from_args", "EXIT_OK", "EXIT_USAGE", "EXIT_DATA", "EXIT_NUMERIC"]
