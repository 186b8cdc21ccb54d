"""
Defaults and Reference Data for POP-CNN

This module centralizes the pipeline constants so that configuration parsing,
the CLI and the tests all agree on the same defaults.
"""

# Dataset splits, in the order they are reported
SPLITS = ("train", "essential_oils", "novel")

TRAIN_SPLIT = "train"

# Odor counts per split of the reference experiment
SPLIT_ODOR_COUNTS = {
    "train": 45,
    "essential_oils": 22,
    "novel": 21,
}

# Human-human correlation of each test split (rater vs. rater median)
HUMAN_HUMAN_CORRELATION = {
    "essential_oils": 0.72,
    "novel": 0.55,
}

# Preprocessing
DEFAULT_SENSORS = 16
DEFAULT_KEEP_SECONDS = 500
DEFAULT_WIDTH = 250
DEFAULT_THRESHOLD_T = 400.0
DEFAULT_LABEL_MIDPOINT = 15.0
DEFAULT_NEUTRAL_HALF_WIDTH = 5.0

PREPROCESS_MODES = ("uniform", "nonuniform")

# Network
KERNEL_WIDTH = 4
DEFAULT_FILTERS1 = 8
DEFAULT_FILTERS2 = 16
DEFAULT_STRIDE_W = 2

# Training
DEFAULT_BATCH_SIZE = 14
DEFAULT_MOMENTUM = 0.8
DEFAULT_LR_INITIAL = 0.01
DEFAULT_LR_FINAL = 0.0001
DEFAULT_LR_DIVISOR = 10.0
DEFAULT_PLATEAU_PATIENCE = 25
PLATEAU_MIN_IMPROVEMENT = 1e-4
DEFAULT_WEIGHT_DECAY = 1e-4
DEFAULT_MAX_EPOCHS = 2000
DEFAULT_MAX_GRAD_NORM = 1.0

# Synthetic data
DEFAULT_REPEATS = 3
DEFAULT_SECONDS = 600
DEFAULT_NOISE_SIGMA = 5.0
DEFAULT_LABEL_NOISE_SIGMA = 0.5
SYNTH_LABEL_HALF_RANGE = 15.0

# Sensor families: (amplitude counts, rise seconds, decay rate 1/seconds)
SENSOR_FAMILIES = {
    "MOX": {"amplitude": (1000.0, 12000.0), "rise": (8.0, 20.0), "decay": (0.004, 0.01)},
    "QMB": {"amplitude": (20.0, 400.0), "rise": (2.0, 6.0), "decay": (0.01, 0.03)},
}

# Weight file
WEIGHTS_MAGIC = b"POPW"
WEIGHTS_VERSION = 1
LAYER_KIND_CONV = 0
LAYER_KIND_DENSE = 1

# Flat configuration keys and their defaults
CONFIG_DEFAULTS = {
    "sensors": DEFAULT_SENSORS,
    "width": DEFAULT_WIDTH,
    "filters1": DEFAULT_FILTERS1,
    "filters2": DEFAULT_FILTERS2,
    "stride_w": DEFAULT_STRIDE_W,
    "seed": 0,
    "threshold_T": DEFAULT_THRESHOLD_T,
    "keep_seconds": DEFAULT_KEEP_SECONDS,
    "label_midpoint": DEFAULT_LABEL_MIDPOINT,
    "neutral_half_width": DEFAULT_NEUTRAL_HALF_WIDTH,
    "batch": DEFAULT_BATCH_SIZE,
    "momentum": DEFAULT_MOMENTUM,
    "lr_initial": DEFAULT_LR_INITIAL,
    "lr_final": DEFAULT_LR_FINAL,
    "lr_divisor": DEFAULT_LR_DIVISOR,
    "plateau_patience": DEFAULT_PLATEAU_PATIENCE,
    "weight_decay": DEFAULT_WEIGHT_DECAY,
    "epochs": DEFAULT_MAX_EPOCHS,
    "max_grad_norm": DEFAULT_MAX_GRAD_NORM,
    "n_odors": sum(SPLIT_ODOR_COUNTS.values()),
    "repeats": DEFAULT_REPEATS,
    "seconds": DEFAULT_SECONDS,
    "noise_sigma": DEFAULT_NOISE_SIGMA,
    "label_noise_sigma": DEFAULT_LABEL_NOISE_SIGMA,
}

# Standard file names inside an output directory
FILE_NAMES = {
    "manifest": "manifest.csv",
    "norm_stats": "norm_stats.csv",
    "schedule": "schedule.csv",
    "profile": "gradient_profile.csv",
    "weights": "weights.popw",
    "history": "history.csv",
    "per_odor": "report_per_odor.csv",
    "summary": "report_summary.csv",
    "scatter": "scatter.csv",
    "runs": "runs.csv",
    "runs_summary": "runs_summary.csv",
    "preprocess": "preprocess.csv",
    "evaluation_runs": "evaluation_runs.csv",
}


def get_default(key: str):
    """
    Get the built-in default of a configuration key.

    Args:
        key: Flat configuration key

    Returns:
        Default value, or None if the key is unknown
    """
    return CONFIG_DEFAULTS.get(key)


def is_config_key(key: str) -> bool:
    """Check whether ``key`` is a recognised configuration key"""
    return key in CONFIG_DEFAULTS


def get_file_name(kind: str) -> str:
    """Get the standard file name of an artifact kind"""
    return FILE_NAMES[kind]


def get_human_human_correlation(split: str):
    """
    Get the reported human-human correlation of a test split.

    Args:
        split: Split name

    Returns:
        Correlation, or None for splits without one (train)
    """
    return HUMAN_HUMAN_CORRELATION.get(split)


def sensor_family(sensor_index: int, sensors: int) -> str:
    """
    Get the family of a sensor position.

    The first half of the array is metal-oxide, the second half quartz
    microbalance.

    Args:
        sensor_index: Zero-based sensor row
        sensors: Total number of sensors

    Returns:
        "MOX" or "QMB"
    """
    return "MOX" if sensor_index < (sensors + 1) // 2 else "QMB"
