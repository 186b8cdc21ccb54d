# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
SVG charts of pipeline CSVs

The chart type follows the columns of the input:
    epoch, loss, lr, val_correlation        training history
    prediction, human_median                evaluation scatter
    n_train_odors, mean, median, std        learning curve
    gradient                                gradient profile (optionally with --schedule)
"""

import argparse
import sys
from typing import TYPE_CHECKING, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from pop_cnn.config import PipelineConfig  # noqa: E402
from pop_cnn.enose.subsample import load_schedule  # noqa: E402
from pop_cnn.exceptions import throw  # noqa: E402
from pop_cnn.utils.csv_io import FLOAT_FORMAT, read_frame  # noqa: E402
from pop_cnn.utils.logging import get_logger, log_error  # noqa: E402

if TYPE_CHECKING:
    from pop_cnn.cli import RunManifest

logger = get_logger(__name__)

CHART_KINDS = {
    "history": ("epoch", "loss", "lr"),
    "scatter": ("prediction", "human_median"),
    "curve": ("n_train_odors", "mean", "std"),
    "profile": ("gradient",),
}


def detect_kind(frame: pd.DataFrame) -> str:
    """
    Raises:
        ArgumentError: the columns match no known chart
    """
    for kind, columns in CHART_KINDS.items():
        if all(column in frame.columns for column in columns):
            return kind
    throw("Cannot tell what to plot from columns: {0}".format(", ".join(map(str, frame.columns))))


def _history(ax, frame: pd.DataFrame) -> None:
    ax.plot(frame["epoch"], frame["loss"], label="training loss")
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean squared error")
    if "val_correlation" in frame.columns and frame["val_correlation"].notna().any():
        twin = ax.twinx()
        twin.plot(frame["epoch"], frame["val_correlation"], color="tab:orange", label="validation r")
        twin.set_ylabel("validation correlation")


def _scatter(ax, frame: pd.DataFrame) -> None:
    ax.scatter(frame["human_median"], frame["prediction"], s=18)
    ax.axhline(0.0, color="grey", linewidth=0.8)
    ax.axvline(0.0, color="grey", linewidth=0.8)
    ax.set_xlabel("human median (centered)")
    ax.set_ylabel("e-nose prediction")


def _curve(ax, frame: pd.DataFrame) -> None:
    ax.errorbar(frame["n_train_odors"], frame["mean"], yerr=frame["std"], marker="o", capsize=3)
    ax.set_xlabel("training odors")
    ax.set_ylabel("validation correlation")


def _profile(ax, frame: pd.DataFrame, schedule_path: Optional[str]) -> None:
    ax.plot(np.arange(len(frame)), frame["gradient"], linewidth=0.8)
    ax.set_xlabel("second")
    ax.set_ylabel("mean sensor gradient")
    if schedule_path:
        for index in load_schedule(schedule_path).indices:
            ax.axvline(index, color="tab:red", linestyle="--", linewidth=0.4)


def render(frame: pd.DataFrame, out_path: str, schedule_path: Optional[str] = None) -> str:
    """Draw ``frame`` to an SVG file and return the chart kind"""
    kind = detect_kind(frame)
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        if kind == "history":
            _history(ax, frame)
        elif kind == "scatter":
            _scatter(ax, frame)
        elif kind == "curve":
            _curve(ax, frame)
        else:
            _profile(ax, frame, schedule_path)
        fig.tight_layout()
        fig.savefig(out_path, format="svg")
    finally:
        plt.close(fig)
    return kind


def cmd_plot(run: "RunManifest", config: PipelineConfig, options: argparse.Namespace) -> int:
    """Write the chart to --out and echo the CSV to stdout"""
    try:
        frame = read_frame(run.input_path)
        kind = render(frame, run.out_file, run.schedule_path)
        logger.info("Wrote %s chart to %s", kind, run.out_file)
        frame.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT)
        return 0

    except Exception as e:
        log_error("Plot Failed", str(e), logger)
        raise
