# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
POP-CNN Model

conv(sensors x 4) -> ReLU -> conv(1 x 4) -> ReLU -> dense(1). The first kernel
spans every sensor so its output has height 1; striding replaces pooling.
"""

from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from pop_cnn.enose.signal_model import OdorSample, SensorMatrix
from pop_cnn.exceptions import ConfigurationError, check_shape, throw
from pop_cnn.network.tensor_nn import (
    ConvLayer,
    DenseLayer,
    batch_mse,
    conv_backward,
    conv_forward,
    dense_backward,
    dense_forward,
    glorot_uniform,
    relu_backward,
    relu_forward,
)
from pop_cnn.utils.constants import (
    DEFAULT_FILTERS1,
    DEFAULT_FILTERS2,
    DEFAULT_SENSORS,
    DEFAULT_STRIDE_W,
    DEFAULT_WIDTH,
    KERNEL_WIDTH,
)

MIN_WIDTH = 2 * KERNEL_WIDTH


@dataclass(frozen=True)
class PopConfig:
    sensors: int = DEFAULT_SENSORS
    width: int = DEFAULT_WIDTH
    filters1: int = DEFAULT_FILTERS1
    filters2: int = DEFAULT_FILTERS2
    stride_w: int = DEFAULT_STRIDE_W
    seed: int = 0

    def validate(self) -> None:
        """
        Raises:
            ConfigurationError: sizes too small for the two 4-wide kernels
        """
        if self.sensors < 1:
            throw("sensors must be at least 1, got {0}".format(self.sensors), ConfigurationError)
        if self.filters1 < 1 or self.filters2 < 1:
            throw("filter counts must be at least 1", ConfigurationError)
        if self.stride_w < 1:
            throw("stride_w must be at least 1, got {0}".format(self.stride_w), ConfigurationError)
        if self.width < MIN_WIDTH:
            throw("width must be at least {0}, got {1}".format(MIN_WIDTH, self.width), ConfigurationError)
        w1 = (self.width - KERNEL_WIDTH) // self.stride_w + 1
        if w1 < KERNEL_WIDTH:
            throw(
                "width {0} at stride {1} leaves {2} columns, too few for the second convolution".format(
                    self.width, self.stride_w, w1),
                ConfigurationError
            )


def feature_widths(config: PopConfig) -> Tuple[int, int]:
    """
    Output widths of the two convolutions

    Returns:
        (w1, w2); (124, 61) at the defaults
    """
    w1 = (config.width - KERNEL_WIDTH) // config.stride_w + 1
    w2 = (w1 - KERNEL_WIDTH) // config.stride_w + 1
    return w1, w2


class PopNetwork:
    """The three-layer pleasantness regressor"""

    def __init__(self, config: PopConfig, conv1: ConvLayer, conv2: ConvLayer, head: DenseLayer):
        self.config = config
        self.conv1 = conv1
        self.conv2 = conv2
        self.head = head
        _, w2 = feature_widths(config)
        check_shape("conv1 kernels", (config.filters1, 1, config.sensors, KERNEL_WIDTH), conv1.kernels.shape)
        check_shape("conv2 kernels", (config.filters2, config.filters1, 1, KERNEL_WIDTH), conv2.kernels.shape)
        check_shape("head weights", (1, config.filters2 * w2), head.weights.shape)
        check_shape("conv1 stride", (1, config.stride_w), conv1.stride)
        check_shape("conv2 stride", (1, config.stride_w), conv2.stride)

    @property
    def layers(self) -> List[Union[ConvLayer, DenseLayer]]:
        return [self.conv1, self.conv2, self.head]

    def parameters(self) -> "OrderedDict[str, np.ndarray]":
        """Parameter arrays in declaration order; updating them updates the network"""
        return OrderedDict([
            ("conv1.kernels", self.conv1.kernels),
            ("conv1.biases", self.conv1.biases),
            ("conv2.kernels", self.conv2.kernels),
            ("conv2.biases", self.conv2.biases),
            ("head.weights", self.head.weights),
            ("head.biases", self.head.biases),
        ])

    @property
    def bias_names(self) -> Tuple[str, ...]:
        return tuple(name for name in self.parameters() if name.endswith(".biases"))

    def check_inputs(self, inputs: np.ndarray) -> np.ndarray:
        inputs = np.asarray(inputs, dtype=np.float64)
        if inputs.ndim != 4:
            throw("Inputs must be (N, 1, sensors, width), got shape {0}".format(inputs.shape))
        check_shape("channels", 1, inputs.shape[1])
        check_shape("sensors", self.config.sensors, inputs.shape[2])
        check_shape("width", self.config.width, inputs.shape[3])
        return inputs

    def _forward(self, inputs: np.ndarray) -> Dict[str, np.ndarray]:
        inputs = self.check_inputs(inputs)
        z1 = conv_forward(inputs, self.conv1)
        a1 = relu_forward(z1)
        z2 = conv_forward(a1, self.conv2)
        a2 = relu_forward(z2)
        flat = a2.reshape(a2.shape[0], -1)
        out = dense_forward(flat, self.head)[:, 0]
        return {"inputs": inputs, "z1": z1, "a1": a1, "z2": z2, "a2": a2, "flat": flat, "out": out}

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Predictions (N,) for a batch (N, 1, sensors, width)"""
        return self._forward(inputs)["out"]

    def loss(self, inputs: np.ndarray, targets: np.ndarray) -> float:
        return batch_mse(self.forward(inputs), targets)[0]

    def loss_and_gradients(
        self,
        inputs: np.ndarray,
        targets: np.ndarray
    ) -> Tuple[float, "OrderedDict[str, np.ndarray]"]:
        """
        Mean squared error of the batch and its gradient for every parameter

        Returns:
            (loss, gradients keyed like ``parameters()``)
        """
        cache = self._forward(inputs)
        loss, d_out = batch_mse(cache["out"], targets)

        head = dense_backward(cache["flat"], self.head, d_out[:, np.newaxis])
        d_a2 = head.input_grad.reshape(cache["a2"].shape)
        conv2 = conv_backward(cache["a1"], self.conv2, relu_backward(cache["z2"], d_a2))
        conv1 = conv_backward(cache["inputs"], self.conv1, relu_backward(cache["z1"], conv2.input_grad))

        return loss, OrderedDict([
            ("conv1.kernels", conv1.weights),
            ("conv1.biases", conv1.biases),
            ("conv2.kernels", conv2.weights),
            ("conv2.biases", conv2.biases),
            ("head.weights", head.weights),
            ("head.biases", head.biases),
        ])

    def predict(self, matrix: Union[SensorMatrix, np.ndarray]) -> float:
        values = matrix.values if isinstance(matrix, SensorMatrix) else np.asarray(matrix, dtype=np.float64)
        if values.ndim != 2:
            throw("Expected a (sensors, width) matrix, got shape {0}".format(values.shape))
        return float(self.forward(values[np.newaxis, np.newaxis, :, :])[0])

    def copy(self) -> "PopNetwork":
        return PopNetwork(
            self.config,
            ConvLayer(self.conv1.kernels.copy(), self.conv1.biases.copy(), self.conv1.stride),
            ConvLayer(self.conv2.kernels.copy(), self.conv2.biases.copy(), self.conv2.stride),
            DenseLayer(self.head.weights.copy(), self.head.biases.copy()),
        )


def build(config: PopConfig) -> PopNetwork:
    """
    Build a Glorot-initialized network; biases start at zero

    Raises:
        ConfigurationError: invalid config
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    _, w2 = feature_widths(config)
    stride = (1, config.stride_w)

    shape1 = (config.filters1, 1, config.sensors, KERNEL_WIDTH)
    conv1 = ConvLayer(
        glorot_uniform(shape1, config.sensors * KERNEL_WIDTH, config.filters1 * config.sensors * KERNEL_WIDTH, rng),
        np.zeros(config.filters1),
        stride,
    )
    shape2 = (config.filters2, config.filters1, 1, KERNEL_WIDTH)
    conv2 = ConvLayer(
        glorot_uniform(shape2, config.filters1 * KERNEL_WIDTH, config.filters2 * KERNEL_WIDTH, rng),
        np.zeros(config.filters2),
        stride,
    )
    head_in = config.filters2 * w2
    head = DenseLayer(glorot_uniform((1, head_in), head_in, 1, rng), np.zeros(1))
    return PopNetwork(config, conv1, conv2, head)


def predict(network: PopNetwork, matrix: Union[SensorMatrix, np.ndarray]) -> float:
    """
    Pleasantness of one normalized sensor matrix; > 0 means pleasant

    Raises:
        ShapeMismatchError: matrix is not (sensors, width)
    """
    return network.predict(matrix)


def predict_odor(network: PopNetwork, samples: Sequence[Union[OdorSample, SensorMatrix]]) -> float:
    """
    Median prediction over the repeats of one odor

    Raises:
        ArgumentError: no repeats, or repeats of different odors
    """
    if len(samples) == 0:
        throw("predict_odor needs at least one repeat")
    odor_ids = {s.odor_id for s in samples if isinstance(s, OdorSample)}
    if len(odor_ids) > 1:
        throw("predict_odor got repeats of several odors: {0}".format(", ".join(sorted(odor_ids))))

    predictions = [network.predict(s.matrix if isinstance(s, OdorSample) else s) for s in samples]
    return float(np.median(predictions))
