# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Gradient-Driven Non-Uniform Subsampling

Time columns are kept densely where the sensor-averaged response changes fast
and sparsely where it changes slowly. The schedule is built once from the
training split and applied to every split.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from pop_cnn.enose.signal_model import Dataset, SensorMatrix
from pop_cnn.exceptions import RangeError, check_shape, throw
from pop_cnn.utils.constants import DEFAULT_THRESHOLD_T, TRAIN_SPLIT
from pop_cnn.utils.csv_io import read_frame, write_column


@dataclass(frozen=True, eq=False)
class GradientProfile:
    """Sensor-averaged response change between consecutive seconds (length n-1)"""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if values.size < 1:
            throw("Gradient profile needs at least one entry")
        if not np.all(np.isfinite(values)):
            throw("Gradient profile contains non-finite entries")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def seconds(self) -> int:
        """Length of the recording the profile describes"""
        return self.values.size + 1

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class SamplingSchedule:
    """Sorted time indices selected for sampling"""

    indices: np.ndarray
    threshold_T: float

    def __post_init__(self):
        indices = np.array(self.indices, dtype=np.int64, copy=True).ravel()
        if indices.size < 2:
            throw("A schedule keeps at least the first and the last second")
        if indices[0] != 0:
            throw("A schedule must start at index 0, got {0}".format(indices[0]))
        if np.any(np.diff(indices) <= 0):
            throw("Schedule indices must be strictly increasing")
        if not self.threshold_T > 0:
            throw("Threshold T must be positive, got {0}".format(self.threshold_T))
        indices.flags.writeable = False
        object.__setattr__(self, "indices", indices)

    @property
    def width(self) -> int:
        return self.indices.size

    @property
    def last(self) -> int:
        return int(self.indices[-1])


def per_sample_gradient(matrix: SensorMatrix) -> GradientProfile:
    """
    Mean over sensors of the one-second response differences

    Entry i is (1/m) * sum_s (r[s, i+1] - r[s, i]).
    """
    if matrix.n < 2:
        throw("Gradient needs at least two seconds")
    return GradientProfile(np.diff(matrix.values, axis=1).mean(axis=0))


def dataset_gradient(profiles: Sequence[GradientProfile]) -> GradientProfile:
    """
    Elementwise mean of per-sample profiles

    Raises:
        ArgumentError: empty list or profiles of different lengths
    """
    if len(profiles) == 0:
        throw("Cannot average an empty list of gradient profiles")
    length = len(profiles[0])
    for profile in profiles:
        check_shape("profile length", length, len(profile))

    total = np.zeros(length, dtype=np.float64)
    for profile in profiles:
        total += profile.values
    return GradientProfile(total / len(profiles))


def build_schedule(profile: GradientProfile, T: float) -> SamplingSchedule:
    """
    Pick sampling instants by accumulating absolute gradient

    Index 0 is always sampled. Walking forward, |R[i-1]| is added to a running
    sum; when the sum strictly exceeds T, index i is sampled and the sum resets.
    The last index is sampled whatever the sum.

    Raises:
        ArgumentError: T is not positive
    """
    if not T > 0:
        throw("Threshold T must be positive, got {0}".format(T))

    magnitudes = np.abs(profile.values)
    last = profile.seconds - 1
    selected: List[int] = [0]
    running = 0.0
    for i in range(1, last + 1):
        running += magnitudes[i - 1]
        if running > T:
            selected.append(i)
            running = 0.0
    if selected[-1] != last:
        selected.append(last)

    return SamplingSchedule(np.array(selected, dtype=np.int64), float(T))


def apply_schedule(matrix: SensorMatrix, schedule: SamplingSchedule) -> SensorMatrix:
    """
    Gather the scheduled columns in order

    Raises:
        RangeError: a scheduled index lies beyond the recording
    """
    if schedule.last >= matrix.n:
        throw(
            "Schedule index {0} is out of range for {1} seconds".format(schedule.last, matrix.n),
            RangeError
        )
    return SensorMatrix(matrix.values[:, schedule.indices])


def schedule_from_dataset(dataset: Dataset, T: float) -> Tuple[GradientProfile, SamplingSchedule]:
    """
    Build the schedule common to all samples from the training split

    Args:
        dataset: Samples truncated to a shared width
        T: Accumulation threshold

    Returns:
        (dataset gradient profile, schedule)
    """
    train = dataset.by_split(TRAIN_SPLIT)
    if len(train) == 0:
        throw("Nonuniform subsampling needs training samples to build the schedule")
    profile = dataset_gradient([per_sample_gradient(s.matrix) for s in train.samples])
    return profile, build_schedule(profile, T)


def save_profile(profile: GradientProfile, path: str) -> None:
    write_column(path, "gradient", profile.values)


def load_profile(path: str) -> GradientProfile:
    return GradientProfile(read_frame(path, required=["gradient"])["gradient"].to_numpy(np.float64))


def save_schedule(schedule: SamplingSchedule, path: str) -> None:
    write_column(path, "index", schedule.indices)


def load_schedule(path: str, threshold_T: float = DEFAULT_THRESHOLD_T) -> SamplingSchedule:
    frame = read_frame(path, required=["index"])
    return SamplingSchedule(frame["index"].to_numpy(np.int64), threshold_T)
