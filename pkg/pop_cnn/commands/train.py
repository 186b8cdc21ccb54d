# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Network training, single run or repeated runs on random odor splits
"""

import argparse
import math
import os
from dataclasses import replace
from typing import TYPE_CHECKING

from pop_cnn.commands.preprocess import saved_mode
from pop_cnn.config import PipelineConfig
from pop_cnn.enose.signal_model import load_dataset
from pop_cnn.exceptions import check_shape, throw
from pop_cnn.experiment.training import augmented_pool, random_split, repeated_runs, train
from pop_cnn.network.pop_model import build
from pop_cnn.network.weights import save_weights
from pop_cnn.utils.constants import TRAIN_SPLIT
from pop_cnn.utils.csv_io import ensure_dir, write_frame
from pop_cnn.utils.formatting import format_metric
from pop_cnn.utils.logging import get_logger, log_error

if TYPE_CHECKING:
    from pop_cnn.cli import RunManifest

logger = get_logger(__name__)


def cmd_train(run: "RunManifest", config: PipelineConfig, options: argparse.Namespace) -> int:
    """
    Train on the train split of a preprocessed manifest

    With --runs K, train K networks on random splits of --n-train-odors odors
    and write runs.csv and runs_summary.csv instead of weights.
    """
    try:
        dataset = load_dataset(run.manifest_path, config.label_midpoint)
        pool = augmented_pool(dataset) if getattr(options, "augmented", False) else dataset.by_split(TRAIN_SPLIT)
        if len(pool) == 0:
            throw("{0} has no training samples".format(run.manifest_path))

        sensors, width = pool.check_consistent()
        pop_config = config.pop
        check_shape("sensors", pop_config.sensors, sensors)
        if width != pop_config.width:
            # only a nonuniform schedule may fix the width independently of the config
            if saved_mode(os.path.dirname(os.path.abspath(run.manifest_path))) != "nonuniform":
                check_shape("width", pop_config.width, width)
            logger.info(
                "Network width follows the nonuniform schedule: %d instead of the configured %d",
                width, pop_config.width
            )
            pop_config = replace(pop_config, width=width)

        ensure_dir(run.out_dir)
        n_train_odors = getattr(options, "n_train_odors", None)
        runs = getattr(options, "runs", None)

        if runs:
            if n_train_odors is None:
                throw("--runs needs --n-train-odors")
            summary = repeated_runs(pool, n_train_odors, runs, pop_config, config.train)
            write_frame(run.artifact("runs"), summary.to_frame())
            write_frame(run.artifact("runs_summary"), summary.summary_frame())
            print("n_train_odors={0} runs={1} mean={2} median={3} std={4}".format(
                n_train_odors, summary.k_runs,
                format_metric(summary.mean), format_metric(summary.median), format_metric(summary.std)
            ))
            return 0

        val_set = None
        train_set = pool
        if n_train_odors is not None:
            train_set, val_set = random_split(pool, n_train_odors, config.seed)

        network, history = train(build(pop_config), train_set, val_set, config.train)
        save_weights(network, run.artifact("weights"))
        history.save_history(run.artifact("history"))

        line = "epochs={0} loss={1} lr={2:g}".format(
            len(history), format_metric(history.losses[-1], 6), history.lrs[-1]
        )
        if val_set is not None and not math.isnan(history.val_correlations[-1]):
            line += " val_r={0}".format(format_metric(history.val_correlations[-1]))
        print(line)
        return 0

    except Exception as e:
        log_error("Training Failed", str(e), logger)
        raise
