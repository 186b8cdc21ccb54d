# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Held-out evaluation of a trained network
"""

import argparse
from dataclasses import replace
from typing import TYPE_CHECKING

from pop_cnn.config import PipelineConfig
from pop_cnn.enose.signal_model import load_dataset
from pop_cnn.exceptions import throw
from pop_cnn.experiment.evaluation import evaluate, repeated_evaluation, save_report, summarize_reports
from pop_cnn.network.weights import load_weights
from pop_cnn.utils.constants import TRAIN_SPLIT, get_human_human_correlation
from pop_cnn.utils.csv_io import ensure_dir, write_frame
from pop_cnn.utils.formatting import format_accuracy, format_metric, format_ratio
from pop_cnn.utils.logging import get_logger, log_error

if TYPE_CHECKING:
    from pop_cnn.cli import RunManifest

logger = get_logger(__name__)


def cmd_evaluate(run: "RunManifest", config: PipelineConfig, options: argparse.Namespace) -> int:
    """
    Write report_per_odor.csv, report_summary.csv and scatter.csv for one split

    The human-human correlation defaults to the reference value of the split.
    With --runs K, K networks are retrained from the train split instead and
    evaluation_runs.csv summarizes them.
    """
    try:
        network = load_weights(run.weights_path)
        dataset = load_dataset(run.manifest_path, config.label_midpoint)
        split = getattr(options, "split", "essential_oils")
        test_set = dataset.by_split(split)
        if len(test_set) == 0:
            throw("{0} has no samples in split '{1}'".format(run.manifest_path, split))

        human_human_r = getattr(options, "human_human_r", None)
        if human_human_r is None:
            human_human_r = get_human_human_correlation(split)
        half_width = config.neutral_half_width

        ensure_dir(run.out_dir)
        runs = getattr(options, "runs", None)
        if runs:
            reports = repeated_evaluation(
                dataset.by_split(TRAIN_SPLIT), test_set, runs,
                replace(config.pop, sensors=network.config.sensors, width=network.config.width),
                config.train, human_human_r, half_width
            )
            summary = summarize_reports(reports)
            write_frame(run.artifact("evaluation_runs"), summary)
            row = summary.iloc[0]
            print("split={0} runs={1} median_r={2} mean_r={3}".format(
                split, runs, format_metric(row["median_r"]), format_metric(row["mean_r"])
            ))
            return 0

        report = evaluate(network, test_set, human_human_r, half_width)
        save_report(report, run.out_dir)
        print("split={0} odors={1} r={2} ratio={3} accuracy={4} n_binary={5}".format(
            split,
            report.n_odors,
            format_metric(report.pearson_r),
            format_ratio(report.machine_human_ratio_pct),
            format_accuracy(report.binary_accuracy),
            report.n_binary,
        ))
        return 0

    except Exception as e:
        log_error("Evaluation Failed", str(e), logger)
        raise
