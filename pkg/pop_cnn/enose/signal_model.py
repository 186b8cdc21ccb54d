# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Odor Sample Data Model
Sensor matrices, labeled samples, datasets and the preprocessing that turns raw
e-nose recordings into fixed-size network inputs
"""

import math
import os
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from pop_cnn.exceptions import RangeError, check_shape, throw
from pop_cnn.utils.constants import (
    DEFAULT_KEEP_SECONDS,
    DEFAULT_LABEL_MIDPOINT,
    DEFAULT_THRESHOLD_T,
    DEFAULT_WIDTH,
    PREPROCESS_MODES,
    SPLITS,
    TRAIN_SPLIT,
)
from pop_cnn.utils.csv_io import FLOAT_FORMAT, ensure_dir, read_frame, read_matrix, write_frame, write_matrix
from pop_cnn.utils.logging import get_logger

if TYPE_CHECKING:
    from pop_cnn.enose.subsample import GradientProfile, SamplingSchedule

logger = get_logger(__name__)

MANIFEST_COLUMNS = ["odor_id", "repeat_index", "path", "raw_vas_label", "split"]


def _frozen(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=np.float64, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class SensorMatrix:
    """
    Raw or preprocessed responses of an e-nose, sensors x seconds

    The wrapped array is a read-only float64 copy.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            throw("Sensor matrix must be 2-D, got {0} dimensions".format(values.ndim))
        if values.shape[0] < 1:
            throw("Sensor matrix needs at least one sensor row")
        if values.shape[1] < 2:
            throw("Sensor matrix needs at least two seconds, got {0}".format(values.shape[1]))
        if not np.all(np.isfinite(values)):
            throw("Sensor matrix contains non-finite entries")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def m(self) -> int:
        """Number of sensors"""
        return self.values.shape[0]

    @property
    def n(self) -> int:
        """Number of seconds"""
        return self.values.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def equals(self, other: "SensorMatrix") -> bool:
        """Bitwise equality of the underlying values"""
        return self.shape == other.shape and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class OdorSample:
    """One measured odor repeat with its centered pleasantness label"""

    odor_id: str
    repeat_index: int
    matrix: SensorMatrix
    label: float
    split: str

    def __post_init__(self):
        if not self.odor_id:
            throw("Odor sample needs a non-empty odor_id")
        if self.repeat_index < 0:
            throw("repeat_index must be non-negative, got {0}".format(self.repeat_index))
        if not math.isfinite(self.label):
            throw("Label of {0}/{1} is not finite".format(self.odor_id, self.repeat_index))
        if self.split not in SPLITS:
            throw("Unknown split '{0}', expected one of {1}".format(self.split, ", ".join(SPLITS)))

    def with_matrix(self, matrix: SensorMatrix) -> "OdorSample":
        return replace(self, matrix=matrix)


@dataclass(frozen=True, eq=False)
class NormStats:
    """Per-sensor minimum and maximum fitted on the training split"""

    per_sensor_min: np.ndarray
    per_sensor_max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.per_sensor_min, dtype=np.float64).ravel()
        hi = np.asarray(self.per_sensor_max, dtype=np.float64).ravel()
        check_shape("sensors", lo.shape[0], hi.shape[0])
        if np.any(lo > hi):
            throw("Normalization stats have min > max for some sensor")
        object.__setattr__(self, "per_sensor_min", _frozen(lo))
        object.__setattr__(self, "per_sensor_max", _frozen(hi))

    @property
    def sensors(self) -> int:
        return self.per_sensor_min.shape[0]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered collection of odor samples"""

    samples: Tuple[OdorSample, ...]
    norm_stats: Optional[NormStats] = None

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def shape(self) -> Optional[Tuple[int, int]]:
        """Shared matrix shape, None when empty"""
        if not self.samples:
            return None
        return self.samples[0].matrix.shape

    def check_consistent(self) -> Tuple[int, int]:
        """Return the shared shape, raising if any sample differs"""
        if not self.samples:
            throw("Dataset is empty")
        shape = self.samples[0].matrix.shape
        for sample in self.samples[1:]:
            check_shape("sensors", shape[0], sample.matrix.shape[0])
            check_shape("width", shape[1], sample.matrix.shape[1])
        return shape

    def by_split(self, split: str) -> "Dataset":
        return Dataset([s for s in self.samples if s.split == split], self.norm_stats)

    def odor_groups(self) -> "OrderedDict[str, List[OdorSample]]":
        """Samples grouped by odor_id in order of first appearance"""
        groups: "OrderedDict[str, List[OdorSample]]" = OrderedDict()
        for sample in self.samples:
            groups.setdefault(sample.odor_id, []).append(sample)
        return groups

    def odor_ids(self) -> List[str]:
        return list(self.odor_groups().keys())

    def subset(self, odor_ids: Iterable[str]) -> "Dataset":
        """Samples of the given odors, preserving dataset order"""
        wanted = set(odor_ids)
        return Dataset([s for s in self.samples if s.odor_id in wanted], self.norm_stats)

    def inputs(self) -> np.ndarray:
        """Stacked matrices as a (N, 1, sensors, width) float64 array"""
        self.check_consistent()
        return np.stack([s.matrix.values for s in self.samples])[:, np.newaxis, :, :]

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.float64)


def truncate(matrix: SensorMatrix, keep_seconds: int) -> SensorMatrix:
    """
    Keep the first ``keep_seconds`` columns of a sensor matrix

    Raises:
        ArgumentError: keep_seconds is not positive
        RangeError: keep_seconds exceeds the number of seconds
    """
    if keep_seconds <= 0:
        throw("keep_seconds must be positive, got {0}".format(keep_seconds))
    if keep_seconds > matrix.n:
        throw(
            "Cannot keep {0} seconds of a {1}-second recording".format(keep_seconds, matrix.n),
            RangeError
        )
    return SensorMatrix(matrix.values[:, :keep_seconds])


def uniform_indices(n: int, target_width: int) -> np.ndarray:
    """Evenly spaced column indices over [0, n-1], endpoints included"""
    positions = np.arange(target_width) * (n - 1) / (target_width - 1)
    return np.floor(positions + 0.5).astype(np.int64)


def uniform_subsample(matrix: SensorMatrix, target_width: int) -> SensorMatrix:
    """
    Select ``target_width`` evenly spaced columns

    Raises:
        ArgumentError: target_width below 2
        RangeError: target_width exceeds the number of seconds
    """
    if target_width < 2:
        throw("target_width must be at least 2, got {0}".format(target_width))
    if target_width > matrix.n:
        throw(
            "Cannot subsample {0} seconds down to {1} columns".format(matrix.n, target_width),
            RangeError
        )
    return SensorMatrix(matrix.values[:, uniform_indices(matrix.n, target_width)])


def fit_normalization(dataset: Dataset) -> NormStats:
    """
    Per-sensor min/max over all training-split samples jointly

    Raises:
        ArgumentError: no training samples, or inconsistent shapes
    """
    train = dataset.by_split(TRAIN_SPLIT)
    if len(train) == 0:
        throw("Cannot fit normalization on a dataset without training samples")
    train.check_consistent()

    stacked = np.concatenate([s.matrix.values for s in train.samples], axis=1)
    return NormStats(stacked.min(axis=1), stacked.max(axis=1))


def apply_normalization(matrix: SensorMatrix, stats: NormStats) -> SensorMatrix:
    """
    Min-max scale each sensor row into [0, 1], clamping out-of-range values

    Rows whose fitted range is empty map to 0.5.
    """
    check_shape("sensors", stats.sensors, matrix.m)

    lo = stats.per_sensor_min[:, np.newaxis]
    span = (stats.per_sensor_max - stats.per_sensor_min)[:, np.newaxis]
    degenerate = span == 0.0

    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = (matrix.values - lo) / np.where(degenerate, 1.0, span)
    scaled = np.clip(scaled, 0.0, 1.0)
    scaled = np.where(degenerate, 0.5, scaled)
    return SensorMatrix(scaled)


def center_label(raw_vas: float, scale_midpoint: float = DEFAULT_LABEL_MIDPOINT) -> float:
    """
    Shift a raw VAS score so that the scale midpoint becomes zero

    Raises:
        ArgumentError: non-finite input
    """
    if not (math.isfinite(raw_vas) and math.isfinite(scale_midpoint)):
        throw("Cannot center non-finite label {0} (midpoint {1})".format(raw_vas, scale_midpoint))
    return float(raw_vas) - float(scale_midpoint)


# Preprocessing pipeline

@dataclass(frozen=True, eq=False)
class PreprocessConfig:
    keep_seconds: int = DEFAULT_KEEP_SECONDS
    width: int = DEFAULT_WIDTH
    threshold_T: float = DEFAULT_THRESHOLD_T
    label_midpoint: float = DEFAULT_LABEL_MIDPOINT
    mode: str = "uniform"

    def __post_init__(self):
        if self.mode not in PREPROCESS_MODES:
            throw("Unknown preprocessing mode '{0}'".format(self.mode))


@dataclass(frozen=True, eq=False)
class Preprocessor:
    """
    Fitted preprocessing: truncate, then uniform or scheduled subsampling,
    then normalization
    """

    keep_seconds: int
    width: Optional[int] = None
    schedule: Optional["SamplingSchedule"] = None
    stats: Optional[NormStats] = None

    @property
    def mode(self) -> str:
        return "nonuniform" if self.schedule is not None else "uniform"

    def reduce(self, matrix: SensorMatrix) -> SensorMatrix:
        """Truncate and subsample, without normalization"""
        from pop_cnn.enose.subsample import apply_schedule

        matrix = truncate(matrix, self.keep_seconds)
        if self.schedule is not None:
            return apply_schedule(matrix, self.schedule)
        return uniform_subsample(matrix, self.width)

    def transform(self, matrix: SensorMatrix) -> SensorMatrix:
        reduced = self.reduce(matrix)
        if self.stats is None:
            return reduced
        return apply_normalization(reduced, self.stats)


def preprocess_dataset(
    dataset: Dataset,
    config: PreprocessConfig
) -> Tuple[Dataset, Preprocessor, Optional["GradientProfile"]]:
    """
    Fit and apply preprocessing to every split

    The sampling schedule (nonuniform mode) and the normalization statistics
    are computed from the training split only.

    Args:
        dataset: Raw dataset
        config: Preprocessing settings, ``config.mode`` picks the subsampling

    Returns:
        (preprocessed dataset, fitted preprocessor, gradient profile or None)
    """
    from pop_cnn.enose.subsample import schedule_from_dataset

    if len(dataset) == 0:
        throw("Cannot preprocess an empty dataset")

    truncated = [s.with_matrix(truncate(s.matrix, config.keep_seconds)) for s in dataset.samples]
    truncated_set = Dataset(truncated)
    truncated_set.check_consistent()

    profile = None
    schedule = None
    if config.mode == "nonuniform":
        profile, schedule = schedule_from_dataset(truncated_set, config.threshold_T)
        logger.info(
            "Sampling schedule with T=%s keeps %d of %d seconds",
            config.threshold_T, len(schedule.indices), config.keep_seconds
        )

    reducer = Preprocessor(config.keep_seconds, config.width, schedule)
    reduced = Dataset([s.with_matrix(reducer.reduce(s.matrix)) for s in dataset.samples])
    stats = fit_normalization(reduced)

    fitted = replace(reducer, stats=stats)
    normalized = [s.with_matrix(apply_normalization(s.matrix, stats)) for s in reduced.samples]
    return Dataset(normalized, stats), fitted, profile


# File formats

def load_dataset(manifest_path: str, scale_midpoint: float = DEFAULT_LABEL_MIDPOINT) -> Dataset:
    """
    Read a manifest and every sample CSV it references

    Manifest lines: ``odor_id,repeat_index,relative_csv_path,raw_vas_label,split``,
    paths relative to the manifest's directory.
    Labels are centered on load, so a label written by ``save_dataset`` comes
    back exact to within one rounding of the midpoint shift (about 1 ulp).

    Raises:
        FileNotFoundError: manifest or a sample file is missing
        ArgumentError: malformed manifest line or sample
    """
    if not os.path.exists(manifest_path):
        raise FileNotFoundError(manifest_path)

    try:
        manifest = pd.read_csv(
            manifest_path,
            header=None,
            names=MANIFEST_COLUMNS,
            dtype={"odor_id": str, "path": str, "split": str},
            encoding="utf-8",
            skipinitialspace=True,
            float_precision="round_trip",
        )
    except pd.errors.EmptyDataError:
        throw("Manifest {0} is empty".format(manifest_path))
    except (pd.errors.ParserError, ValueError) as e:
        throw("Manifest {0} is malformed: {1}".format(manifest_path, e))

    if manifest.isnull().any().any():
        throw("Manifest {0} has incomplete lines".format(manifest_path))

    base_dir = os.path.dirname(os.path.abspath(manifest_path))
    samples = []
    for row in manifest.itertuples(index=False):
        path = os.path.join(base_dir, row.path)
        if not os.path.exists(path):
            raise FileNotFoundError(path)
        try:
            repeat_index = int(row.repeat_index)
            raw_label = float(row.raw_vas_label)
        except ValueError:
            throw("Manifest line for {0} has a non-numeric field".format(row.odor_id))
        samples.append(OdorSample(
            odor_id=str(row.odor_id),
            repeat_index=repeat_index,
            matrix=SensorMatrix(read_matrix(path)),
            label=center_label(raw_label, scale_midpoint),
            split=str(row.split).strip(),
        ))

    logger.debug("Loaded %d samples from %s", len(samples), manifest_path)
    return Dataset(samples)


def save_dataset(
    dataset: Dataset,
    out_dir: str,
    scale_midpoint: float = DEFAULT_LABEL_MIDPOINT,
    manifest_name: str = "manifest.csv"
) -> str:
    """
    Write one CSV per sample plus the manifest

    Matrices reload bit for bit. The manifest stores raw ratings,
    label + scale_midpoint, which can differ from the source rating in the
    last bit.

    Returns:
        Path of the written manifest
    """
    sample_dir = ensure_dir(os.path.join(out_dir, "samples"))
    rows = []
    for sample in dataset.samples:
        file_name = "{0}_{1}.csv".format(sample.odor_id, sample.repeat_index)
        write_matrix(os.path.join(sample_dir, file_name), sample.matrix.values)
        rows.append({
            "odor_id": sample.odor_id,
            "repeat_index": sample.repeat_index,
            "path": "samples/" + file_name,
            "raw_vas_label": sample.label + scale_midpoint,
            "split": sample.split,
        })

    manifest_path = os.path.join(out_dir, manifest_name)
    pd.DataFrame(rows, columns=MANIFEST_COLUMNS).to_csv(
        manifest_path, header=False, index=False, float_format=FLOAT_FORMAT, encoding="utf-8"
    )
    return manifest_path


def save_norm_stats(stats: NormStats, path: str) -> None:
    """Rows are sensors, columns are min and max"""
    write_frame(path, pd.DataFrame({"min": stats.per_sensor_min, "max": stats.per_sensor_max}))


def load_norm_stats(path: str) -> NormStats:
    frame = read_frame(path, required=["min", "max"])
    return NormStats(frame["min"].to_numpy(np.float64), frame["max"].to_numpy(np.float64))
