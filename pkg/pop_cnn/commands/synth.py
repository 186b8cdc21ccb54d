# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Synthetic dataset generation
"""

import argparse
from typing import TYPE_CHECKING

from pop_cnn.config import PipelineConfig
from pop_cnn.enose.synth_data import generate, make_paper_shaped_splits, write_dataset
from pop_cnn.utils.constants import SPLITS
from pop_cnn.utils.formatting import format_metric
from pop_cnn.utils.logging import get_logger, log_error

if TYPE_CHECKING:
    from pop_cnn.cli import RunManifest

logger = get_logger(__name__)


def cmd_synth(run: "RunManifest", config: PipelineConfig, options: argparse.Namespace) -> int:
    """Write a synthetic dataset (manifest + one CSV per sample) to the output directory"""
    try:
        if getattr(options, "layout", "three-split") == "three-split":
            dataset = make_paper_shaped_splits(config.synth)
        else:
            dataset = generate(config.synth)

        manifest = write_dataset(dataset, run.out_dir, config.label_midpoint)
        logger.info("Wrote %s", manifest)

        labels = dataset.labels()
        counts = " ".join(
            "{0}={1}".format(split, len(dataset.by_split(split).odor_ids())) for split in SPLITS
        )
        print("samples={0} odors: {1} labels=[{2}, {3}]".format(
            len(dataset), counts, format_metric(labels.min(), 3), format_metric(labels.max(), 3)
        ))
        return 0

    except Exception as e:
        log_error("Synthetic Data Generation Failed", str(e), logger)
        raise
