# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Preprocessing of a raw dataset into network inputs

Besides the preprocessed samples and manifest, the output directory receives
everything needed to preprocess a new raw sample the same way: the
normalization stats, the schedule (nonuniform mode) and a one-row
preprocess.csv with keep_seconds, width, mode and threshold_T.
"""

import argparse
import os
from dataclasses import replace
from typing import TYPE_CHECKING, Optional

import pandas as pd

from pop_cnn.config import PipelineConfig
from pop_cnn.enose.signal_model import (
    Preprocessor,
    load_dataset,
    load_norm_stats,
    preprocess_dataset,
    save_dataset,
    save_norm_stats,
)
from pop_cnn.enose.subsample import load_schedule, save_profile, save_schedule
from pop_cnn.utils.constants import get_file_name
from pop_cnn.utils.csv_io import ensure_dir, read_frame, write_frame
from pop_cnn.utils.logging import get_logger, log_error

if TYPE_CHECKING:
    from pop_cnn.cli import RunManifest

logger = get_logger(__name__)

META_COLUMNS = ["keep_seconds", "width", "mode", "threshold_T"]


def save_preprocessor(preprocessor: Preprocessor, threshold_T: float, out_dir: str) -> None:
    """Persist a fitted preprocessor next to the preprocessed data"""
    width = preprocessor.schedule.width if preprocessor.schedule is not None else preprocessor.width
    write_frame(
        os.path.join(out_dir, get_file_name("preprocess")),
        pd.DataFrame([[preprocessor.keep_seconds, width, preprocessor.mode, threshold_T]], columns=META_COLUMNS)
    )
    save_norm_stats(preprocessor.stats, os.path.join(out_dir, get_file_name("norm_stats")))
    if preprocessor.schedule is not None:
        save_schedule(preprocessor.schedule, os.path.join(out_dir, get_file_name("schedule")))


def load_preprocessor(directory: str) -> Preprocessor:
    """
    Rebuild the preprocessor saved by ``save_preprocessor``

    Raises:
        FileNotFoundError: a required artifact is missing
    """
    meta = read_frame(os.path.join(directory, get_file_name("preprocess")), required=META_COLUMNS).iloc[0]
    stats = load_norm_stats(os.path.join(directory, get_file_name("norm_stats")))
    schedule = None
    if meta["mode"] == "nonuniform":
        schedule = load_schedule(os.path.join(directory, get_file_name("schedule")), float(meta["threshold_T"]))
    return Preprocessor(int(meta["keep_seconds"]), int(meta["width"]), schedule, stats)


def saved_mode(directory: str) -> Optional[str]:
    """Preprocessing mode recorded in ``directory``, None when nothing was saved there"""
    path = os.path.join(directory, get_file_name("preprocess"))
    if not os.path.exists(path):
        return None
    return str(read_frame(path, required=META_COLUMNS).iloc[0]["mode"])


def cmd_preprocess(run: "RunManifest", config: PipelineConfig, options: argparse.Namespace) -> int:
    """Fit preprocessing on the train split and apply it to every split"""
    try:
        dataset = load_dataset(run.manifest_path, config.label_midpoint)
        settings = replace(config.preprocess, mode=getattr(options, "mode", "uniform"))
        processed, preprocessor, profile = preprocess_dataset(dataset, settings)

        ensure_dir(run.out_dir)
        save_dataset(processed, run.out_dir, config.label_midpoint)
        save_preprocessor(preprocessor, settings.threshold_T, run.out_dir)
        if profile is not None:
            save_profile(profile, run.artifact("profile"))

        sensors, width = processed.check_consistent()
        print("samples={0} mode={1} shape={2}x{3}".format(len(processed), preprocessor.mode, sensors, width))
        return 0

    except Exception as e:
        log_error("Preprocessing Failed", str(e), logger)
        raise
