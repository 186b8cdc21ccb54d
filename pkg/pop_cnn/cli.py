# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Command-line entry point

    pop-cnn synth --out data/raw
    pop-cnn preprocess --manifest data/raw/manifest.csv --out data/uniform
    pop-cnn train --manifest data/uniform/manifest.csv --out runs/a
    pop-cnn evaluate --manifest data/uniform/manifest.csv --weights runs/a/weights.popw --out runs/a
    pop-cnn predict --weights runs/a/weights.popw --sample x.csv --artifacts data/uniform
    pop-cnn plot --input runs/a/history.csv --out runs/a/history.svg

Exit codes: 0 success, 2 missing input or IO failure, 3 validation failure.
"""

import argparse
import importlib
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import pandas as pd

from pop_cnn import hooks
from pop_cnn.config import load_config
from pop_cnn.exceptions import PopCNNError
from pop_cnn.utils.constants import PREPROCESS_MODES, SPLITS, get_file_name
from pop_cnn.utils.logging import configure_logging, get_logger, log_error

logger = get_logger(__name__)

VALIDATION_ERRORS = (PopCNNError, pd.errors.ParserError, pd.errors.EmptyDataError)


@dataclass
class RunManifest:
    """Resolved paths of one command invocation and the overrides applied"""

    config_path: Optional[str] = None
    manifest_path: Optional[str] = None
    out_dir: Optional[str] = None
    weights_path: Optional[str] = None
    sample_path: Optional[str] = None
    artifacts_dir: Optional[str] = None
    input_path: Optional[str] = None
    schedule_path: Optional[str] = None
    overrides: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace, overrides: Dict[str, Any]) -> "RunManifest":
        def path(name: str) -> Optional[str]:
            value = getattr(args, name, None)
            return os.path.abspath(value) if value else None

        return cls(
            config_path=path("config"),
            manifest_path=path("manifest"),
            out_dir=path("out"),
            weights_path=path("weights"),
            sample_path=path("sample"),
            artifacts_dir=path("artifacts"),
            input_path=path("input"),
            schedule_path=path("schedule"),
            overrides={k: v for k, v in overrides.items() if v is not None},
        )

    @property
    def out_file(self) -> Optional[str]:
        """--out of the commands that write a single file"""
        return self.out_dir

    def artifact(self, kind: str, directory: Optional[str] = None) -> str:
        """Standard file of ``kind`` inside ``directory`` (default: the output directory)"""
        return os.path.join(directory or self.out_dir or os.getcwd(), get_file_name(kind))

    def log_overrides(self) -> None:
        for key, value in sorted(self.overrides.items()):
            logger.info("Command line overrides %s = %s", key, value)


def get_attr(dotted_path: str) -> Callable:
    """Import ``package.module.attr`` and return attr"""
    module_name, attr = dotted_path.rsplit(".", 1)
    return getattr(importlib.import_module(module_name), attr)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, OSError):
        return hooks.exit_codes["io_error"]
    return hooks.exit_codes["validation_error"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--seed", type=int, help="master seed (overrides config and POP_SEED)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="pop-cnn", description=hooks.app_description)
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    synth.add_argument("--out", required=True)
    synth.add_argument(
        "--layout", choices=("three-split", "train-only"), default="three-split",
        help="three-split: 45/22/21 odors over three splits; train-only: n_odors training odors"
    )

    preprocess = sub.add_parser("preprocess", parents=[common], help="truncate, subsample and normalize")
    preprocess.add_argument("--manifest", required=True)
    preprocess.add_argument("--out", required=True)
    preprocess.add_argument("--mode", choices=PREPROCESS_MODES, default="uniform")
    preprocess.add_argument("--threshold-T", dest="threshold_T", type=float)

    profile = sub.add_parser("gradient-profile", parents=[common], help="dataset gradient and sampling schedule")
    profile.add_argument("--manifest", required=True)
    profile.add_argument("--out", required=True)
    profile.add_argument("--threshold-T", dest="threshold_T", type=float)

    train = sub.add_parser("train", parents=[common], help="train a network on the train split")
    train.add_argument("--manifest", required=True)
    train.add_argument("--out", required=True)
    train.add_argument("--n-train-odors", dest="n_train_odors", type=int)
    train.add_argument("--runs", type=int, help="repeated runs on random splits")
    train.add_argument("--augmented", action="store_true", help="split from train + essential_oils odors")

    evaluate = sub.add_parser("evaluate", parents=[common], help="score a network on a held-out split")
    evaluate.add_argument("--manifest", required=True)
    evaluate.add_argument("--weights", required=True)
    evaluate.add_argument("--out", default=".")
    evaluate.add_argument("--split", choices=SPLITS, default=SPLITS[1])
    evaluate.add_argument("--human-human-r", dest="human_human_r", type=float)
    evaluate.add_argument("--neutral-half-width", dest="neutral_half_width", type=float)
    evaluate.add_argument("--runs", type=int, help="retrain this many seeded networks and summarize")

    predict = sub.add_parser("predict", parents=[common], help="predict one sample")
    predict.add_argument("--weights", required=True)
    predict.add_argument("--sample", required=True)
    predict.add_argument("--artifacts", help="preprocess output directory to apply to a raw sample")

    plot = sub.add_parser("plot", parents=[common], help="SVG chart of a history, scatter, curve or profile CSV")
    plot.add_argument("--input", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--schedule", help="schedule CSV drawn over a gradient profile")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    overrides = {key: getattr(args, flag, None) for flag, key in hooks.config_overrides.items()}
    try:
        config = load_config(args.config, overrides)
        run = RunManifest.from_args(args, overrides)
    except (OSError,) + VALIDATION_ERRORS as e:
        log_error("Configuration Failed", str(e), logger)
        return exit_code_for(e)

    run.log_overrides()
    handler = get_attr(hooks.commands[args.command])
    try:
        return handler(run, config, args)
    except (OSError,) + VALIDATION_ERRORS as e:
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
