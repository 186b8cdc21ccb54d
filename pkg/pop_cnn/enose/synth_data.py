# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Synthetic E-Nose Datasets

Each sensor follows a rise-and-decay curve with a fixed per-sensor shape; odors
differ only in per-sensor amplitudes, and the pleasantness label is linear in
those amplitudes. A pipeline that works should therefore recover the label.
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from pop_cnn.enose.signal_model import Dataset, OdorSample, SensorMatrix
from pop_cnn.exceptions import ConfigurationError, throw
from pop_cnn.utils.constants import (
    DEFAULT_LABEL_NOISE_SIGMA,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_REPEATS,
    DEFAULT_SECONDS,
    DEFAULT_SENSORS,
    SPLIT_ODOR_COUNTS,
    SENSOR_FAMILIES,
    SPLITS,
    SYNTH_LABEL_HALF_RANGE,
    TRAIN_SPLIT,
    sensor_family,
)
from pop_cnn.utils.logging import get_logger

logger = get_logger(__name__)

Range = Tuple[float, float]


@dataclass(frozen=True)
class SynthConfig:
    """
    Settings of the synthetic generator

    ``rise_time_range`` is in seconds, ``decay_constant_range`` is a decay rate
    in 1/seconds, ``amplitude_range`` in raw counts. Leaving a range as None
    draws it from the sensor's family (metal-oxide or quartz microbalance).
    """

    n_odors: int = sum(SPLIT_ODOR_COUNTS.values())
    repeats_per_odor: int = DEFAULT_REPEATS
    sensors: int = DEFAULT_SENSORS
    seconds: int = DEFAULT_SECONDS
    rise_time_range: Optional[Range] = None
    decay_constant_range: Optional[Range] = None
    amplitude_range: Optional[Range] = None
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    label_weights: Optional[Tuple[float, ...]] = None
    label_noise_sigma: float = DEFAULT_LABEL_NOISE_SIGMA
    seed: int = 0

    def validate(self) -> None:
        """
        Raises:
            ConfigurationError: any field is out of its valid range
        """
        if self.n_odors < 1:
            throw("n_odors must be at least 1", ConfigurationError)
        if self.repeats_per_odor < 1:
            throw("repeats_per_odor must be at least 1", ConfigurationError)
        if self.sensors < 1:
            throw("sensors must be at least 1", ConfigurationError)
        if self.seconds < 2:
            throw("seconds must be at least 2", ConfigurationError)
        if self.seed < 0:
            throw("seed must be non-negative, got {0}".format(self.seed), ConfigurationError)
        if self.noise_sigma < 0 or self.label_noise_sigma < 0:
            throw("noise sigmas must be non-negative", ConfigurationError)

        for name in ("rise_time_range", "decay_constant_range", "amplitude_range"):
            bounds = getattr(self, name)
            if bounds is None:
                continue
            lo, hi = bounds
            if lo > hi:
                throw("{0} is not ordered: ({1}, {2})".format(name, lo, hi), ConfigurationError)
            if name != "amplitude_range" and lo <= 0:
                throw("{0} must be positive".format(name), ConfigurationError)

        if self.label_weights is not None and len(self.label_weights) != self.sensors:
            throw(
                "label_weights has {0} entries for {1} sensors".format(len(self.label_weights), self.sensors),
                ConfigurationError
            )


@dataclass(frozen=True, eq=False)
class SensorShapes:
    """Per-sensor response constants shared by every odor of a dataset"""

    rise: np.ndarray
    decay: np.ndarray
    amplitude_lo: np.ndarray
    amplitude_hi: np.ndarray

    def curves(self, seconds: int) -> np.ndarray:
        """Unit-amplitude response of every sensor, shape (sensors, seconds)"""
        t = np.arange(seconds, dtype=np.float64)[np.newaxis, :]
        rise = self.rise[:, np.newaxis]
        decay = self.decay[:, np.newaxis]
        return (1.0 - np.exp(-t / rise)) * np.exp(-decay * t)


def _family_range(config: SynthConfig, sensor: int, key: str, override: Optional[Range]) -> Range:
    if override is not None:
        return override
    return SENSOR_FAMILIES[sensor_family(sensor, config.sensors)][key]


def draw_sensor_shapes(config: SynthConfig, rng: np.random.Generator) -> SensorShapes:
    rise, decay, lo, hi = [], [], [], []
    for sensor in range(config.sensors):
        rise.append(rng.uniform(*_family_range(config, sensor, "rise", config.rise_time_range)))
        decay.append(rng.uniform(*_family_range(config, sensor, "decay", config.decay_constant_range)))
        a_lo, a_hi = _family_range(config, sensor, "amplitude", config.amplitude_range)
        lo.append(a_lo)
        hi.append(a_hi)
    return SensorShapes(np.array(rise), np.array(decay), np.array(lo), np.array(hi))


def default_label_weights(shapes: SensorShapes) -> np.ndarray:
    """
    Alternating-sign weights scaled by each sensor's amplitude ceiling, so
    large and small sensors contribute on a comparable footing
    """
    sensors = shapes.amplitude_hi.size
    signs = np.where(np.arange(sensors) % 2 == 0, 1.0, -1.0)
    magnitude = 1.0 + np.arange(sensors) / max(sensors, 1)
    ceiling = np.where(shapes.amplitude_hi > 0, shapes.amplitude_hi, 1.0)
    return signs * magnitude / ceiling


def rescale_labels(raw: np.ndarray, half_range: float = SYNTH_LABEL_HALF_RANGE) -> np.ndarray:
    """Affinely map raw scores onto [-half_range, half_range]"""
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.zeros_like(raw)
    return -half_range + 2.0 * half_range * (raw - lo) / (hi - lo)


def generate(config: SynthConfig, splits: Optional[Sequence[str]] = None) -> Dataset:
    """
    Generate a labeled synthetic dataset

    Args:
        config: Generator settings
        splits: Split tag per odor; defaults to all "train"

    Returns:
        Dataset of n_odors * repeats_per_odor samples, ordered by odor then repeat

    Raises:
        ConfigurationError: invalid config or split list of the wrong length
    """
    config.validate()
    if splits is None:
        splits = [TRAIN_SPLIT] * config.n_odors
    if len(splits) != config.n_odors:
        throw("Got {0} split tags for {1} odors".format(len(splits), config.n_odors), ConfigurationError)

    # child 0 drives the sensor shapes, child i+1 drives odor i
    children = np.random.SeedSequence(config.seed).spawn(config.n_odors + 1)
    shapes = draw_sensor_shapes(config, np.random.default_rng(children[0]))
    curves = shapes.curves(config.seconds)

    weights = (
        np.asarray(config.label_weights, dtype=np.float64)
        if config.label_weights is not None
        else default_label_weights(shapes)
    )

    odor_rngs = [np.random.default_rng(child) for child in children[1:]]
    amplitudes = np.array([rng.uniform(shapes.amplitude_lo, shapes.amplitude_hi) for rng in odor_rngs])

    labels = rescale_labels(amplitudes @ weights)
    if config.label_noise_sigma > 0:
        labels = labels + np.array([rng.normal(0.0, config.label_noise_sigma) for rng in odor_rngs])

    samples: List[OdorSample] = []
    for index, rng in enumerate(odor_rngs):
        clean = amplitudes[index][:, np.newaxis] * curves
        for repeat in range(config.repeats_per_odor):
            noisy = clean
            if config.noise_sigma > 0:
                noisy = clean + rng.normal(0.0, config.noise_sigma, size=clean.shape)
            samples.append(OdorSample(
                odor_id="odor_{0:03d}".format(index),
                repeat_index=repeat,
                matrix=SensorMatrix(noisy),
                label=float(labels[index]),
                split=splits[index],
            ))

    logger.debug(
        "Generated %d samples of %d odors, labels in [%.3f, %.3f]",
        len(samples), config.n_odors, labels.min(), labels.max()
    )
    return Dataset(samples)


def make_paper_shaped_splits(config: Optional[SynthConfig] = None) -> Dataset:
    """
    Generate disjoint train / essential_oils / novel odor sets with 45/22/21 odors

    Labels of all three splits share one rescaling so they are comparable.
    """
    config = config or SynthConfig()
    splits = [name for name in SPLITS for _ in range(SPLIT_ODOR_COUNTS[name])]
    return generate(replace(config, n_odors=len(splits)), splits)


def write_dataset(dataset: Dataset, out_dir: str, scale_midpoint: float) -> str:
    """Write in the manifest + CSV-per-sample layout the loader reads"""
    from pop_cnn.enose.signal_model import save_dataset

    return save_dataset(dataset, out_dir, scale_midpoint)
