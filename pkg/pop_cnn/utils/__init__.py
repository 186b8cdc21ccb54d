# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
POP-CNN utilities package
"""

from pop_cnn.utils.constants import (
    CONFIG_DEFAULTS,
    FILE_NAMES,
    HUMAN_HUMAN_CORRELATION,
    SENSOR_FAMILIES,
    SPLIT_ODOR_COUNTS,
    SPLITS,
    TRAIN_SPLIT,
    get_default,
    get_file_name,
    get_human_human_correlation,
    is_config_key,
    sensor_family
)

from pop_cnn.utils.csv_io import (
    FLOAT_FORMAT,
    ensure_dir,
    read_frame,
    read_matrix,
    write_column,
    write_frame,
    write_matrix
)

from pop_cnn.utils.formatting import (
    format_accuracy,
    format_metric,
    format_ratio
)

from pop_cnn.utils.logging import (
    configure_logging,
    get_logger,
    log_error
)

__all__ = [
    # Constants
    "CONFIG_DEFAULTS",
    "FILE_NAMES",
    "HUMAN_HUMAN_CORRELATION",
    "SENSOR_FAMILIES",
    "SPLIT_ODOR_COUNTS",
    "SPLITS",
    "TRAIN_SPLIT",
    "get_default",
    "get_file_name",
    "get_human_human_correlation",
    "is_config_key",
    "sensor_family",

    # CSV files
    "FLOAT_FORMAT",
    "ensure_dir",
    "read_frame",
    "read_matrix",
    "write_column",
    "write_frame",
    "write_matrix",

    # Display formatting
    "format_accuracy",
    "format_metric",
    "format_ratio",

    # Logging
    "configure_logging",
    "get_logger",
    "log_error"
]
