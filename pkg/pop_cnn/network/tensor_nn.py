# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Minimal Neural Network Engine

Strided valid-padding 2-D cross-correlation, ReLU, a dense layer and squared
error loss, each with an exact backward pass. Tensors are float64 numpy arrays
laid out as (batch, channels, height, width).
"""

from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Protocol, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from pop_cnn.exceptions import check_shape, throw

EPSILON_RANGE = (1e-7, 1e-3)

# denominators below this compare gradients on an absolute scale
RELATIVE_ERROR_FLOOR = 1e-12


def as_tensor(x) -> np.ndarray:
    """
    Validate and convert a batch to a float64 4-D tensor

    Raises:
        ArgumentError: wrong rank or non-finite entries
    """
    tensor = np.asarray(x, dtype=np.float64)
    if tensor.ndim != 4:
        throw("Expected a (batch, channels, height, width) tensor, got shape {0}".format(tensor.shape))
    if not np.all(np.isfinite(tensor)):
        throw("Tensor contains non-finite entries")
    return tensor


@dataclass(eq=False)
class ConvLayer:
    """Dense-connectivity convolution: every output map sees every input map"""

    kernels: np.ndarray
    biases: np.ndarray
    stride: Tuple[int, int] = (1, 1)

    def __post_init__(self):
        self.kernels = np.asarray(self.kernels, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        self.stride = (int(self.stride[0]), int(self.stride[1]))
        if self.kernels.ndim != 4:
            throw("Kernels must be (out, in, kh, kw), got shape {0}".format(self.kernels.shape))
        if min(self.kernels.shape) < 1:
            throw("Kernel dimensions must be at least 1, got {0}".format(self.kernels.shape))
        check_shape("bias length", self.kernels.shape[0], self.biases.shape[0] if self.biases.ndim == 1 else None)
        if min(self.stride) < 1:
            throw("Stride components must be at least 1, got {0}".format(self.stride))

    @property
    def out_channels(self) -> int:
        return self.kernels.shape[0]

    @property
    def in_channels(self) -> int:
        return self.kernels.shape[1]

    @property
    def kernel_size(self) -> Tuple[int, int]:
        return self.kernels.shape[2], self.kernels.shape[3]

    def output_size(self, height: int, width: int) -> Tuple[int, int]:
        kh, kw = self.kernel_size
        sh, sw = self.stride
        return (height - kh) // sh + 1, (width - kw) // sw + 1


@dataclass(eq=False)
class DenseLayer:
    """Affine map y = W x + b with W of shape (out, in)"""

    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2:
            throw("Dense weights must be (out, in), got shape {0}".format(self.weights.shape))
        check_shape("bias length", self.weights.shape[0], self.biases.shape[0] if self.biases.ndim == 1 else None)
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            throw("Dense layer has non-finite parameters")

    @property
    def out_features(self) -> int:
        return self.weights.shape[0]

    @property
    def in_features(self) -> int:
        return self.weights.shape[1]


@dataclass(eq=False)
class LayerGrads:
    """Parameter gradients shaped like the owning layer plus the input gradient"""

    weights: np.ndarray
    biases: np.ndarray
    input_grad: np.ndarray


def _check_conv_input(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    x = as_tensor(x)
    check_shape("in_channels", layer.in_channels, x.shape[1])
    kh, kw = layer.kernel_size
    if kh > x.shape[2] or kw > x.shape[3]:
        throw("Kernel {0}x{1} is larger than the {2}x{3} input".format(kh, kw, x.shape[2], x.shape[3]))
    return x


def _windows(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """Strided views of shape (N, C, Ho, Wo, kh, kw)"""
    sh, sw = layer.stride
    return sliding_window_view(x, layer.kernel_size, axis=(2, 3))[:, :, ::sh, ::sw]


def conv_forward(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """
    Pre-activation of a strided valid convolution

    Args:
        x: Input tensor (N, C_in, H, W)
        layer: Convolution layer

    Returns:
        Tensor (N, C_out, (H - kh) // sh + 1, (W - kw) // sw + 1)

    Raises:
        ArgumentError: channel mismatch or kernel larger than the input
    """
    x = _check_conv_input(x, layer)
    out = np.tensordot(_windows(x, layer), layer.kernels, axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + layer.biases[np.newaxis, :, np.newaxis, np.newaxis]
    return np.ascontiguousarray(out)


def conv_oracle(x, layer: ConvLayer) -> np.ndarray:
    """
    Reference convolution written as explicit loops

    Same contract as ``conv_forward``; used only to check it.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4:
        throw("Expected a 4-D input, got shape {0}".format(x.shape))
    n_batch, channels, height, width = x.shape
    out_ch, in_ch, kh, kw = layer.kernels.shape
    sh, sw = layer.stride
    if channels != in_ch:
        throw("in_channels mismatch: expected {0}, got {1}".format(in_ch, channels))
    if kh > height or kw > width:
        throw("Kernel {0}x{1} is larger than the {2}x{3} input".format(kh, kw, height, width))

    out_h = (height - kh) // sh + 1
    out_w = (width - kw) // sw + 1
    out = np.zeros((n_batch, out_ch, out_h, out_w), dtype=np.float64)
    for n in range(n_batch):
        for o in range(out_ch):
            for i in range(out_h):
                for j in range(out_w):
                    total = 0.0
                    for c in range(in_ch):
                        for u in range(kh):
                            for v in range(kw):
                                total += x[n, c, i * sh + u, j * sw + v] * layer.kernels[o, c, u, v]
                    out[n, o, i, j] = total + layer.biases[o]
    return out


def conv_backward(x: np.ndarray, layer: ConvLayer, upstream: np.ndarray) -> LayerGrads:
    """
    Gradients of a convolution given dL/d(output)

    Raises:
        ShapeMismatchError: upstream shape differs from the forward output shape
    """
    x = _check_conv_input(x, layer)
    upstream = np.asarray(upstream, dtype=np.float64)
    out_h, out_w = layer.output_size(x.shape[2], x.shape[3])
    check_shape("upstream shape", (x.shape[0], layer.out_channels, out_h, out_w), upstream.shape)

    d_kernels = np.tensordot(upstream, _windows(x, layer), axes=([0, 2, 3], [0, 2, 3]))
    d_biases = upstream.sum(axis=(0, 2, 3))

    # scatter every kernel tap back onto the input positions it touched
    sh, sw = layer.stride
    kh, kw = layer.kernel_size
    d_input = np.zeros_like(x)
    for u in range(kh):
        for v in range(kw):
            contribution = np.tensordot(upstream, layer.kernels[:, :, u, v], axes=([1], [0]))
            d_input[:, :, u:u + sh * (out_h - 1) + 1:sh, v:v + sw * (out_w - 1) + 1:sw] += \
                contribution.transpose(0, 3, 1, 2)

    return LayerGrads(d_kernels, d_biases, d_input)


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def relu_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Pass the upstream gradient where x > 0; the subgradient at 0 is 0"""
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    check_shape("relu shape", x.shape, upstream.shape)
    return np.where(x > 0.0, upstream, 0.0)


def dense_forward(x: np.ndarray, layer: DenseLayer) -> np.ndarray:
    """
    y = W x + b for a flat vector (in,) or a batch of them (N, in)

    Raises:
        ShapeMismatchError: input length differs from the layer's in-features
    """
    x = np.asarray(x, dtype=np.float64)
    check_shape("dense input length", layer.in_features, x.shape[-1])
    return x @ layer.weights.T + layer.biases


def dense_backward(x: np.ndarray, layer: DenseLayer, upstream: np.ndarray) -> LayerGrads:
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    check_shape("dense input length", layer.in_features, x.shape[-1])
    check_shape("dense upstream length", layer.out_features, upstream.shape[-1])

    x2 = np.atleast_2d(x)
    up2 = np.atleast_2d(upstream)
    check_shape("batch", x2.shape[0], up2.shape[0])
    d_input = up2 @ layer.weights
    if x.ndim == 1:
        d_input = d_input[0]
    return LayerGrads(up2.T @ x2, up2.sum(axis=0), d_input)


def mse_loss(pred: float, target: float) -> Tuple[float, float]:
    """
    Squared error of one prediction

    Returns:
        (loss, dloss/dpred)
    """
    if not (np.isfinite(pred) and np.isfinite(target)):
        throw("Loss inputs must be finite, got pred={0}, target={1}".format(pred, target))
    diff = float(pred) - float(target)
    return diff * diff, 2.0 * diff


def batch_mse(preds: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean squared error over a batch

    Returns:
        (mean loss, per-sample gradient 2 (p - t) / N)
    """
    preds = np.asarray(preds, dtype=np.float64).ravel()
    targets = np.asarray(targets, dtype=np.float64).ravel()
    check_shape("batch", preds.size, targets.size)
    if preds.size == 0:
        throw("Loss of an empty batch is undefined")
    if not (np.all(np.isfinite(preds)) and np.all(np.isfinite(targets))):
        throw("Loss inputs must be finite")
    diff = preds - targets
    return float(np.mean(diff * diff)), 2.0 * diff / preds.size


def glorot_uniform(shape: Tuple[int, ...], fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform in [-s, s] with s = sqrt(6 / (fan_in + fan_out))"""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Differentiable(Protocol):
    """What ``gradient_check`` needs from a model"""

    def parameters(self) -> "OrderedDict[str, np.ndarray]":
        ...

    def loss(self, inputs: np.ndarray, targets: np.ndarray) -> float:
        ...

    def loss_and_gradients(self, inputs: np.ndarray, targets: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
        ...


def gradient_check(
    network: Differentiable,
    inputs: np.ndarray,
    targets: np.ndarray,
    epsilon: float = 1e-5
) -> float:
    """
    Compare analytic gradients with central finite differences

    Every scalar parameter is nudged by +/- epsilon in place and restored.

    Args:
        network: Model exposing parameters(), loss() and loss_and_gradients()
        inputs: Batch of inputs
        targets: Matching targets
        epsilon: Finite-difference step

    Returns:
        Largest relative error |a - n| / max(|a|, |n|, 1e-12) over all parameters

    Raises:
        ArgumentError: epsilon outside [1e-7, 1e-3]
    """
    lo, hi = EPSILON_RANGE
    if not lo <= epsilon <= hi:
        throw("epsilon must lie in [{0}, {1}], got {2}".format(lo, hi, epsilon))

    _, analytic = network.loss_and_gradients(inputs, targets)
    worst = 0.0
    for name, param in network.parameters().items():
        grad = analytic[name]
        for index in np.ndindex(param.shape):
            original = param[index]
            param[index] = original + epsilon
            loss_plus = network.loss(inputs, targets)
            param[index] = original - epsilon
            loss_minus = network.loss(inputs, targets)
            param[index] = original

            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            a = float(grad[index])
            error = abs(a - numeric) / max(abs(a), abs(numeric), RELATIVE_ERROR_FLOOR)
            worst = max(worst, error)
    return worst
