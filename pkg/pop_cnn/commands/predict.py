# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Single-sample prediction
"""

import argparse
from typing import TYPE_CHECKING

from pop_cnn.commands.preprocess import load_preprocessor
from pop_cnn.config import PipelineConfig
from pop_cnn.enose.signal_model import SensorMatrix
from pop_cnn.network.pop_model import predict
from pop_cnn.network.weights import load_weights
from pop_cnn.utils.csv_io import FLOAT_FORMAT, read_matrix
from pop_cnn.utils.logging import get_logger, log_error

if TYPE_CHECKING:
    from pop_cnn.cli import RunManifest

logger = get_logger(__name__)

PLEASANT = "pleasant"
NOT_PLEASANT = "unpleasant-or-boundary"


def verdict(prediction: float) -> str:
    """A prediction above zero reads as pleasant"""
    return PLEASANT if prediction > 0.0 else NOT_PLEASANT


def cmd_predict(run: "RunManifest", config: PipelineConfig, options: argparse.Namespace) -> int:
    """
    Print the prediction for one sample CSV and its verdict

    Without --artifacts the sample must already be preprocessed; with it the
    saved preprocessing is applied to the raw sample first.
    """
    try:
        network = load_weights(run.weights_path)
        matrix = SensorMatrix(read_matrix(run.sample_path))
        if run.artifacts_dir:
            matrix = load_preprocessor(run.artifacts_dir).transform(matrix)

        prediction = predict(network, matrix)
        print("{0}\t{1}".format(FLOAT_FORMAT % prediction, verdict(prediction)))
        return 0

    except Exception as e:
        log_error("Prediction Failed", str(e), logger)
        raise
