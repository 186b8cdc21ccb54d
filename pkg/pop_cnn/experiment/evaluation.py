# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Evaluation

Pearson correlation of per-odor predictions with human medians, the ratio to
the human-human correlation, and pleasant/unpleasant accuracy outside the
neutral band.
"""

import math
import os
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np
import pandas as pd

from pop_cnn.enose.signal_model import Dataset
from pop_cnn.exceptions import ArgumentError, DegenerateInputError, check_shape, throw
from pop_cnn.network.pop_model import PopConfig, PopNetwork, build, predict_odor
from pop_cnn.utils.constants import DEFAULT_NEUTRAL_HALF_WIDTH, get_file_name
from pop_cnn.utils.csv_io import ensure_dir, write_frame
from pop_cnn.utils.logging import get_logger

if TYPE_CHECKING:
    from pop_cnn.experiment.training import TrainConfig

logger = get_logger(__name__)

SUMMARY_COLUMNS = ["pearson_r", "n_odors", "machine_human_ratio_pct", "binary_accuracy", "n_binary"]


@dataclass
class EvalReport:
    pearson_r: float
    n_odors: int
    machine_human_ratio_pct: Optional[float] = None
    binary_accuracy: Optional[float] = None
    n_binary: int = 0
    per_odor: List[Tuple[str, float, float]] = field(default_factory=list)

    def per_odor_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.per_odor, columns=["odor_id", "prediction", "human_median"])

    def scatter_frame(self) -> pd.DataFrame:
        return self.per_odor_frame()[["prediction", "human_median"]]

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame([[
            self.pearson_r,
            self.n_odors,
            self.machine_human_ratio_pct,
            self.binary_accuracy,
            self.n_binary,
        ]], columns=SUMMARY_COLUMNS)


def pearson(x, y) -> float:
    """
    Sample Pearson correlation, symmetric in its arguments

    Raises:
        ShapeMismatchError: x and y differ in length
        ArgumentError: fewer than two points or non-finite values
        DegenerateInputError: either vector is constant
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    check_shape("length", x.size, y.size)
    if x.size < 2:
        throw("Pearson correlation needs at least two points, got {0}".format(x.size))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        throw("Pearson correlation of non-finite values")
    if np.all(x == x[0]) or np.all(y == y[0]):
        throw("Pearson correlation of a constant vector is undefined", DegenerateInputError)

    xm = x - x.mean()
    ym = y - y.mean()
    sxx = float(np.dot(xm, xm))
    syy = float(np.dot(ym, ym))
    if sxx == 0.0 or syy == 0.0:
        throw("Pearson correlation of a constant vector is undefined", DegenerateInputError)
    r = float(np.dot(xm, ym)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def machine_human_ratio(r_machine: float, r_human_human: float) -> float:
    """
    Machine-human correlation as a percentage of the human-human correlation

    Raises:
        ArgumentError: r_human_human is not positive
    """
    if not r_human_human > 0:
        throw("Human-human correlation must be positive, got {0}".format(r_human_human))
    return 100.0 * r_machine / r_human_human


def binary_classify(predictions, labels, neutral_half_width: float = DEFAULT_NEUTRAL_HALF_WIDTH) -> Tuple[float, int]:
    """
    Pleasant/unpleasant accuracy on odors outside the neutral band

    An odor with |label| <= neutral_half_width is left out; for the others a
    prediction > 0 reads as pleasant and is correct when the label is > 0.

    Returns:
        (accuracy, number of odors used)

    Raises:
        ArgumentError: negative half-width
        DegenerateInputError: every odor falls inside the band
    """
    if neutral_half_width < 0:
        throw("neutral_half_width must be non-negative, got {0}".format(neutral_half_width))
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=np.float64).ravel()
    check_shape("length", predictions.size, labels.size)

    used = np.abs(labels) > neutral_half_width
    n_used = int(used.sum())
    if n_used == 0:
        throw("No odor lies outside the neutral band of half-width {0}".format(neutral_half_width),
              DegenerateInputError)
    correct = (predictions[used] > 0.0) == (labels[used] > 0.0)
    return float(correct.sum()) / n_used, n_used


def odor_predictions(network: PopNetwork, dataset: Dataset) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """
    Median prediction and median label of every odor

    Returns:
        (odor ids, predictions, human medians) in order of first appearance
    """
    ids, predictions, medians = [], [], []
    for odor_id, repeats in dataset.odor_groups().items():
        ids.append(odor_id)
        predictions.append(predict_odor(network, repeats))
        medians.append(float(np.median([s.label for s in repeats])))
    return ids, np.asarray(predictions), np.asarray(medians)


def heldout_correlation(network: PopNetwork, dataset: Dataset) -> float:
    """
    Per-odor Pearson correlation of predictions with human medians

    Raises:
        ArgumentError: fewer than two odors
        DegenerateInputError: constant predictions or labels
    """
    _, predictions, medians = odor_predictions(network, dataset)
    return pearson(predictions, medians)


def validation_correlation(network: PopNetwork, dataset: Dataset) -> float:
    """Per-epoch monitoring variant of ``heldout_correlation``: NaN when undefined"""
    try:
        return heldout_correlation(network, dataset)
    except (ArgumentError, DegenerateInputError):
        return math.nan


def evaluate(
    network: PopNetwork,
    test_set: Dataset,
    human_human_r: Optional[float] = None,
    neutral_half_width: float = DEFAULT_NEUTRAL_HALF_WIDTH
) -> EvalReport:
    """
    Score a network on held-out odors

    Args:
        network: Trained network
        test_set: Samples preprocessed with the training split's schedule and stats
        human_human_r: Reference correlation for the ratio, optional
        neutral_half_width: Half-width of the neutral band in centered units

    Returns:
        Report with correlation, ratio, binary accuracy and per-odor rows

    Raises:
        ArgumentError: empty test set
        DegenerateInputError: constant predictions or labels
    """
    if len(test_set) == 0:
        throw("Cannot evaluate on an empty test set")

    ids, predictions, medians = odor_predictions(network, test_set)
    r = pearson(predictions, medians)
    ratio = machine_human_ratio(r, human_human_r) if human_human_r is not None else None

    try:
        accuracy, n_binary = binary_classify(predictions, medians, neutral_half_width)
    except DegenerateInputError as e:
        logger.warning("Binary accuracy skipped: %s", e)
        accuracy, n_binary = None, 0

    return EvalReport(
        pearson_r=r,
        n_odors=len(ids),
        machine_human_ratio_pct=ratio,
        binary_accuracy=accuracy,
        n_binary=n_binary,
        per_odor=list(zip(ids, predictions.tolist(), medians.tolist())),
    )


def repeated_evaluation(
    train_set: Dataset,
    test_set: Dataset,
    k_runs: int,
    pop_config: PopConfig,
    train_config: "TrainConfig",
    human_human_r: Optional[float] = None,
    neutral_half_width: float = DEFAULT_NEUTRAL_HALF_WIDTH
) -> List[EvalReport]:
    """
    Train ``k_runs`` networks (seeds seed + i) on the full training set and
    evaluate each on the test set
    """
    from pop_cnn.experiment.training import train

    if k_runs < 1:
        throw("k_runs must be at least 1, got {0}".format(k_runs))

    reports = []
    for run in range(k_runs):
        network = build(replace(pop_config, seed=pop_config.seed + run))
        train(network, train_set, None, replace(train_config, seed=train_config.seed + run))
        report = evaluate(network, test_set, human_human_r, neutral_half_width)
        logger.info("Run %d/%d: r = %.4f", run + 1, k_runs, report.pearson_r)
        reports.append(report)
    return reports


def summarize_reports(reports: List[EvalReport]) -> pd.DataFrame:
    """One row: runs, median and mean correlation, median accuracy"""
    rs = np.array([r.pearson_r for r in reports], dtype=np.float64)
    accuracies = np.array([r.binary_accuracy for r in reports if r.binary_accuracy is not None], dtype=np.float64)
    return pd.DataFrame([{
        "k_runs": len(reports),
        "median_r": float(np.median(rs)),
        "mean_r": float(rs.mean()),
        "std_r": float(rs.std()),
        "median_accuracy": float(np.median(accuracies)) if accuracies.size else math.nan,
    }])


def save_report(report: EvalReport, out_dir: str) -> None:
    """Write the per-odor, summary and scatter CSVs"""
    ensure_dir(out_dir)
    write_frame(os.path.join(out_dir, get_file_name("per_odor")), report.per_odor_frame())
    write_frame(os.path.join(out_dir, get_file_name("summary")), report.summary_frame())
    write_frame(os.path.join(out_dir, get_file_name("scatter")), report.scatter_frame())
