# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Training

Momentum SGD with L2 weight decay on weights (never biases), a staged learning
rate that is divided on training-loss plateaus, random by-odor splits and the
repeated-run driver behind learning curves.
"""

import math
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from pop_cnn.enose.signal_model import Dataset
from pop_cnn.exceptions import ConfigurationError, DegenerateInputError, check_shape, throw
from pop_cnn.experiment.evaluation import heldout_correlation, validation_correlation
from pop_cnn.network.pop_model import PopConfig, PopNetwork, build
from pop_cnn.utils.constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_LR_DIVISOR,
    DEFAULT_LR_FINAL,
    DEFAULT_LR_INITIAL,
    DEFAULT_MAX_EPOCHS,
    DEFAULT_MAX_GRAD_NORM,
    DEFAULT_MOMENTUM,
    DEFAULT_PLATEAU_PATIENCE,
    DEFAULT_WEIGHT_DECAY,
    PLATEAU_MIN_IMPROVEMENT,
    SPLITS,
    TRAIN_SPLIT,
)
from pop_cnn.utils.csv_io import write_frame
from pop_cnn.utils.logging import get_logger

logger = get_logger(__name__)

HISTORY_COLUMNS = ["epoch", "loss", "lr", "val_correlation"]
CURVE_COLUMNS = ["n_train_odors", "k_runs", "mean", "median", "std"]


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = DEFAULT_BATCH_SIZE
    momentum: float = DEFAULT_MOMENTUM
    lr_initial: float = DEFAULT_LR_INITIAL
    lr_final: float = DEFAULT_LR_FINAL
    lr_divisor: float = DEFAULT_LR_DIVISOR
    plateau_patience: int = DEFAULT_PLATEAU_PATIENCE
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    max_epochs: int = DEFAULT_MAX_EPOCHS
    max_grad_norm: float = DEFAULT_MAX_GRAD_NORM
    seed: int = 0

    def validate(self) -> None:
        if self.batch_size < 1:
            throw("batch_size must be at least 1, got {0}".format(self.batch_size), ConfigurationError)
        if not 0.0 <= self.momentum < 1.0:
            throw("momentum must lie in [0, 1), got {0}".format(self.momentum), ConfigurationError)
        if not 0.0 < self.lr_final <= self.lr_initial:
            throw(
                "Learning rates must satisfy 0 < lr_final <= lr_initial, got {0} and {1}".format(
                    self.lr_final, self.lr_initial),
                ConfigurationError
            )
        if self.lr_divisor <= 1.0:
            throw("lr_divisor must exceed 1, got {0}".format(self.lr_divisor), ConfigurationError)
        if self.plateau_patience < 1:
            throw("plateau_patience must be at least 1", ConfigurationError)
        if self.weight_decay < 0.0:
            throw("weight_decay must be non-negative", ConfigurationError)
        if self.max_epochs < 1:
            throw("max_epochs must be at least 1", ConfigurationError)
        if not self.max_grad_norm >= 0.0:
            throw("max_grad_norm must be non-negative, got {0}".format(self.max_grad_norm), ConfigurationError)


@dataclass
class OptimizerState:
    """One zero-initialized velocity buffer per parameter array"""

    velocity: Dict[str, np.ndarray]

    @classmethod
    def zeros_like(cls, params: Dict[str, np.ndarray]) -> "OptimizerState":
        return cls(OrderedDict((name, np.zeros_like(values, dtype=np.float64)) for name, values in params.items()))


@dataclass
class TrainHistory:
    epochs: List[int] = field(default_factory=list)
    losses: List[float] = field(default_factory=list)
    lrs: List[float] = field(default_factory=list)
    val_correlations: List[float] = field(default_factory=list)

    def append(self, epoch: int, loss: float, lr: float, val_correlation: float = math.nan) -> None:
        self.epochs.append(epoch)
        self.losses.append(loss)
        self.lrs.append(lr)
        self.val_correlations.append(val_correlation)

    def __len__(self) -> int:
        return len(self.epochs)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "epoch": self.epochs,
            "loss": self.losses,
            "lr": self.lrs,
            "val_correlation": self.val_correlations,
        }, columns=HISTORY_COLUMNS)

    def save_history(self, path: str) -> None:
        write_frame(path, self.to_frame())


class PlateauDetector:
    """
    Signals a plateau after ``patience`` epochs without a relative improvement
    of the best training loss larger than ``min_improvement``
    """

    def __init__(self, patience: int, min_improvement: float = PLATEAU_MIN_IMPROVEMENT):
        self.patience = patience
        self.min_improvement = min_improvement
        self.best = math.inf
        self.stale_epochs = 0

    def update(self, loss: float) -> bool:
        if math.isinf(self.best) or (self.best - loss) > self.min_improvement * abs(self.best):
            self.best = loss
            self.stale_epochs = 0
            return False

        self.stale_epochs += 1
        if self.stale_epochs >= self.patience:
            self.stale_epochs = 0
            return True
        return False


def sgd_step(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    state: OptimizerState,
    lr: float,
    momentum: float,
    weight_decay: float,
    no_decay: Iterable[str] = ()
) -> Tuple[Dict[str, np.ndarray], OptimizerState]:
    """
    One momentum SGD update, in place

    v <- momentum * v - lr * (g + weight_decay * theta);  theta <- theta + v
    Parameters named in ``no_decay`` (the biases) skip the decay term.

    Raises:
        ArgumentError: a gradient or velocity is missing or mis-shaped
    """
    skip = set(no_decay)
    for name, theta in params.items():
        if name not in grads or name not in state.velocity:
            throw("No gradient or velocity for parameter {0}".format(name))
        grad = np.asarray(grads[name], dtype=np.float64)
        velocity = state.velocity[name]
        check_shape(name, theta.shape, grad.shape)
        check_shape(name, theta.shape, velocity.shape)

        step = grad if name in skip or weight_decay == 0.0 else grad + weight_decay * theta
        velocity *= momentum
        velocity -= lr * step
        theta += velocity
    return params, state


def lr_schedule_step(current_lr: float, plateau_detected: bool, config: TrainConfig) -> float:
    """Divide the learning rate on a plateau, never going below lr_final"""
    if not plateau_detected:
        return current_lr
    new_lr = current_lr / config.lr_divisor
    if new_lr < config.lr_final or math.isclose(new_lr, config.lr_final, rel_tol=1e-9):
        return config.lr_final
    return new_lr


def clip_gradients(grads: Dict[str, np.ndarray], max_norm: float) -> Tuple[Dict[str, np.ndarray], float]:
    """
    Rescale all gradients together so their global L2 norm is at most ``max_norm``

    A ``max_norm`` of 0 leaves the gradients untouched.

    Returns:
        (gradients, norm before clipping)
    """
    norm = math.sqrt(sum(float(np.sum(np.square(g))) for g in grads.values()))
    if max_norm <= 0.0 or norm <= max_norm:
        return grads, norm
    factor = max_norm / norm
    return OrderedDict((name, np.asarray(g, dtype=np.float64) * factor) for name, g in grads.items()), norm


@dataclass(frozen=True)
class TargetScaler:
    """
    Affine map between labels and the zero-mean, unit-variance targets the
    optimizer sees

    A network trains in standardized units; folding the map into its output
    layer afterwards makes it predict in label units again.
    """

    mean: float = 0.0
    scale: float = 1.0

    @classmethod
    def fit(cls, labels) -> "TargetScaler":
        """Constant labels get scale 1"""
        labels = np.asarray(labels, dtype=np.float64).ravel()
        if labels.size == 0:
            throw("Cannot fit a target scaler to no labels")
        scale = float(labels.std())
        if not (math.isfinite(scale) and scale > 0.0):
            scale = 1.0
        return cls(float(labels.mean()), scale)

    def transform(self, labels) -> np.ndarray:
        return (np.asarray(labels, dtype=np.float64) - self.mean) / self.scale

    def fold_into(self, network: PopNetwork) -> PopNetwork:
        """Rescale the output layer in place so standardized outputs become labels"""
        network.head.weights *= self.scale
        network.head.biases *= self.scale
        network.head.biases += self.mean
        return network


def train(
    network: PopNetwork,
    train_set: Dataset,
    val_set: Optional[Dataset],
    config: TrainConfig
) -> Tuple[PopNetwork, TrainHistory]:
    """
    Train ``network`` in place

    Every epoch visits a seeded permutation of the training samples in
    mini-batches (the last may be smaller); each batch gradient is the batch
    mean. Training stops after ``max_epochs`` or when a plateau is hit while
    the learning rate is already at its floor.

    The optimizer fits labels standardized by a ``TargetScaler`` and batch
    gradients are clipped to ``max_grad_norm``. The output layer of a freshly
    built network therefore starts at the training-label mean, and the
    network is handed back predicting in label units. Recorded losses are in
    label units.

    Args:
        network: Network to train
        train_set: Preprocessed training samples
        val_set: Optional held-out samples for the per-epoch correlation
        config: Optimizer settings

    Returns:
        (network, history)

    Raises:
        ArgumentError: empty training set or inputs that do not fit the network
    """
    config.validate()
    if len(train_set) == 0:
        throw("Cannot train on an empty dataset")
    inputs = network.check_inputs(train_set.inputs())
    labels = train_set.labels()
    has_validation = val_set is not None and len(val_set) > 0
    if has_validation:
        network.check_inputs(val_set.inputs())

    scaler = TargetScaler.fit(labels)
    targets = scaler.transform(labels)
    label_loss_factor = scaler.scale ** 2
    logger.debug("Training targets standardized with mean %.6g, scale %.6g", scaler.mean, scaler.scale)

    rng = np.random.default_rng(config.seed)
    params = network.parameters()
    state = OptimizerState.zeros_like(params)
    no_decay = network.bias_names
    detector = PlateauDetector(config.plateau_patience)
    history = TrainHistory()
    lr = config.lr_initial
    count = len(targets)

    try:
        for epoch in range(1, config.max_epochs + 1):
            order = rng.permutation(count)
            total = 0.0
            for start in range(0, count, config.batch_size):
                batch = order[start:start + config.batch_size]
                loss, grads = network.loss_and_gradients(inputs[batch], targets[batch])
                grads, _ = clip_gradients(grads, config.max_grad_norm)
                sgd_step(params, grads, state, lr, config.momentum, config.weight_decay, no_decay)
                total += loss * len(batch)
            epoch_loss = total / count

            # the correlation is unchanged by the affine output rescaling
            val_r = validation_correlation(network, val_set) if has_validation else math.nan
            history.append(epoch, epoch_loss * label_loss_factor, lr, val_r)
            logger.debug("epoch %d loss %.6g lr %g val_r %.4f", epoch, history.losses[-1], lr, val_r)

            if detector.update(epoch_loss):
                if lr <= config.lr_final:
                    logger.info("Loss plateaued at the final learning rate, stopping after epoch %d", epoch)
                    break
                lr = lr_schedule_step(lr, True, config)
                logger.info("Loss plateaued at epoch %d, learning rate now %g", epoch, lr)
    finally:
        scaler.fold_into(network)

    return network, history


def random_split(dataset: Dataset, n_train_odors: int, seed: int) -> Tuple[Dataset, Dataset]:
    """
    Split by odor: all repeats of an odor land on the same side

    Raises:
        ArgumentError: n_train_odors outside [1, number of odors - 1]
    """
    odor_ids = dataset.odor_ids()
    if not 1 <= n_train_odors < len(odor_ids):
        throw("n_train_odors must lie in [1, {0}], got {1}".format(len(odor_ids) - 1, n_train_odors))

    order = np.random.default_rng(seed).permutation(len(odor_ids))
    train_ids = {odor_ids[i] for i in order[:n_train_odors]}
    val_ids = [odor_id for odor_id in odor_ids if odor_id not in train_ids]
    return dataset.subset(train_ids), dataset.subset(val_ids)


@dataclass(frozen=True)
class RunSummary:
    """
    Validation correlations of repeated runs at one training-set size

    Raises:
        DegenerateInputError: a run has an undefined (non-finite) correlation
    """

    n_train_odors: int
    correlations: Tuple[float, ...]
    seeds: Tuple[int, ...]

    def __post_init__(self):
        check_shape("seeds", len(self.correlations), len(self.seeds))
        undefined = [seed for seed, r in zip(self.seeds, self.correlations) if not math.isfinite(r)]
        if undefined:
            throw(
                "{0} of {1} runs with {2} training odors have an undefined correlation (seeds {3})".format(
                    len(undefined), len(self.correlations), self.n_train_odors, ", ".join(map(str, undefined))),
                DegenerateInputError
            )

    @property
    def k_runs(self) -> int:
        return len(self.correlations)

    @property
    def mean(self) -> float:
        return float(np.mean(self.correlations))

    @property
    def median(self) -> float:
        return float(np.median(self.correlations))

    @property
    def std(self) -> float:
        return float(np.std(self.correlations))

    def to_frame(self) -> pd.DataFrame:
        """One row per run"""
        return pd.DataFrame({
            "run": list(range(self.k_runs)),
            "seed": list(self.seeds),
            "n_train_odors": [self.n_train_odors] * self.k_runs,
            "val_correlation": list(self.correlations),
        })

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [[self.n_train_odors, self.k_runs, self.mean, self.median, self.std]],
            columns=CURVE_COLUMNS
        )


def repeated_runs(
    dataset: Dataset,
    n_train_odors: int,
    k_runs: int,
    pop_config: PopConfig,
    train_config: TrainConfig
) -> RunSummary:
    """
    Train ``k_runs`` networks on independent random splits

    Run i uses seed + i for its split, its initialization and its shuffling.

    Raises:
        ArgumentError: k_runs below 1 or an invalid split size
        DegenerateInputError: a trained network predicts a constant on its validation odors
    """
    if k_runs < 1:
        throw("k_runs must be at least 1, got {0}".format(k_runs))

    correlations = []
    seeds = []
    for run in range(k_runs):
        seed = train_config.seed + run
        train_part, val_part = random_split(dataset, n_train_odors, seed)
        network = build(replace(pop_config, seed=pop_config.seed + run))
        train(network, train_part, None, replace(train_config, seed=seed))
        try:
            r = heldout_correlation(network, val_part)
        except DegenerateInputError as e:
            throw("Run {0}/{1} (seed {2}) with {3} training odors: {4}".format(
                run + 1, k_runs, seed, n_train_odors, e), DegenerateInputError)
        logger.info("Run %d/%d with %d training odors: validation r = %.4f", run + 1, k_runs, n_train_odors, r)
        correlations.append(r)
        seeds.append(seed)

    return RunSummary(n_train_odors, tuple(correlations), tuple(seeds))


def learning_curve(
    dataset: Dataset,
    sizes: Sequence[int],
    k_runs: int,
    pop_config: PopConfig,
    train_config: TrainConfig
) -> pd.DataFrame:
    """
    Validation correlation against the number of training odors

    Returns:
        One row per size: n_train_odors, k_runs, mean, median, std
    """
    if not sizes:
        throw("learning_curve needs at least one training-set size")
    frames = [repeated_runs(dataset, n, k_runs, pop_config, train_config).summary_frame() for n in sizes]
    return pd.concat(frames, ignore_index=True)


def augmented_pool(dataset: Dataset) -> Dataset:
    """Training odors plus the essential oils, as one pool to split from"""
    pooled = {TRAIN_SPLIT, SPLITS[1]}
    return Dataset([s for s in dataset.samples if s.split in pooled], dataset.norm_stats)
