# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Dataset gradient profile and the sampling schedule built from it
"""

import argparse
from typing import TYPE_CHECKING

from pop_cnn.config import PipelineConfig
from pop_cnn.enose.signal_model import Dataset, load_dataset, truncate
from pop_cnn.enose.subsample import save_profile, save_schedule, schedule_from_dataset
from pop_cnn.utils.csv_io import ensure_dir
from pop_cnn.utils.logging import get_logger, log_error

if TYPE_CHECKING:
    from pop_cnn.cli import RunManifest

logger = get_logger(__name__)


def cmd_gradient_profile(run: "RunManifest", config: PipelineConfig, options: argparse.Namespace) -> int:
    """Write gradient_profile.csv and schedule.csv for the truncated train split"""
    try:
        keep = config.preprocess.keep_seconds
        dataset = load_dataset(run.manifest_path, config.label_midpoint)
        truncated = Dataset([s.with_matrix(truncate(s.matrix, keep)) for s in dataset.samples])
        profile, schedule = schedule_from_dataset(truncated, config.preprocess.threshold_T)

        ensure_dir(run.out_dir)
        save_profile(profile, run.artifact("profile"))
        save_schedule(schedule, run.artifact("schedule"))
        print("seconds={0} T={1:g} width={2} first={3} last={4}".format(
            profile.seconds, schedule.threshold_T, schedule.width, int(schedule.indices[0]), schedule.last
        ))
        return 0

    except Exception as e:
        log_error("Gradient Profile Failed", str(e), logger)
        raise
