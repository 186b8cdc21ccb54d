# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Binary weight files

Layout, all little-endian:
    b"POPW"
    int64 version, layer count, sensors, width
    per layer int64 kind, out, in, kh, kw, sh, sw   (dense layers: kh = kw = sh = sw = 1)
    float64 parameters in declaration order (each layer's weights, then its biases)
"""

import os
from typing import List

import numpy as np

from pop_cnn.exceptions import throw
from pop_cnn.network.pop_model import PopConfig, PopNetwork
from pop_cnn.network.tensor_nn import ConvLayer, DenseLayer
from pop_cnn.utils.constants import LAYER_KIND_CONV, LAYER_KIND_DENSE, WEIGHTS_MAGIC, WEIGHTS_VERSION

INT = np.dtype("<i8")
FLOAT = np.dtype("<f8")
LAYER_FIELDS = 7


def _layer_record(layer) -> List[int]:
    if isinstance(layer, ConvLayer):
        out_ch, in_ch, kh, kw = layer.kernels.shape
        sh, sw = layer.stride
        return [LAYER_KIND_CONV, out_ch, in_ch, kh, kw, sh, sw]
    return [LAYER_KIND_DENSE, layer.out_features, layer.in_features, 1, 1, 1, 1]


def save_weights(network: PopNetwork, path: str) -> None:
    """Write the network's parameters to ``path``"""
    header = [WEIGHTS_VERSION, len(network.layers), network.config.sensors, network.config.width]
    for layer in network.layers:
        header.extend(_layer_record(layer))

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as f:
        f.write(WEIGHTS_MAGIC)
        f.write(np.asarray(header, dtype=INT).tobytes())
        for values in network.parameters().values():
            f.write(np.ascontiguousarray(values, dtype=FLOAT).tobytes())


def load_weights(path: str) -> PopNetwork:
    """
    Read a weight file written by ``save_weights``

    Raises:
        FileNotFoundError: path does not exist
        ArgumentError: bad magic, unknown version, truncated file or a layer
            structure that is not a POP network
    """
    with open(path, "rb") as f:
        data = f.read()

    if data[:len(WEIGHTS_MAGIC)] != WEIGHTS_MAGIC:
        throw("{0} is not a weight file".format(path))
    offset = len(WEIGHTS_MAGIC)

    def read_ints(count: int) -> np.ndarray:
        nonlocal offset
        end = offset + count * INT.itemsize
        if end > len(data):
            throw("Weight file {0} is truncated".format(path))
        values = np.frombuffer(data, dtype=INT, count=count, offset=offset)
        offset = end
        return values

    version, layer_count, sensors, width = (int(v) for v in read_ints(4))
    if version != WEIGHTS_VERSION:
        throw("Unsupported weight file version {0}".format(version))
    if layer_count != 3:
        throw("Expected 3 layers, found {0}".format(layer_count))

    records = read_ints(layer_count * LAYER_FIELDS).reshape(layer_count, LAYER_FIELDS).tolist()
    kinds = [r[0] for r in records]
    if kinds != [LAYER_KIND_CONV, LAYER_KIND_CONV, LAYER_KIND_DENSE]:
        throw("Layer kinds {0} do not describe a POP network".format(kinds))

    def read_floats(shape) -> np.ndarray:
        nonlocal offset
        count = int(np.prod(shape))
        end = offset + count * FLOAT.itemsize
        if end > len(data):
            throw("Weight file {0} is truncated".format(path))
        values = np.frombuffer(data, dtype=FLOAT, count=count, offset=offset).reshape(shape).copy()
        offset = end
        return values

    layers = []
    for kind, out, fan_in, kh, kw, sh, sw in records:
        if kind == LAYER_KIND_CONV:
            layers.append(ConvLayer(read_floats((out, fan_in, kh, kw)), read_floats((out,)), (sh, sw)))
        else:
            layers.append(DenseLayer(read_floats((out, fan_in)), read_floats((out,))))
    if offset != len(data):
        throw("Weight file {0} has {1} trailing bytes".format(path, len(data) - offset))

    conv1, conv2, head = layers
    config = PopConfig(
        sensors=sensors,
        width=width,
        filters1=conv1.out_channels,
        filters2=conv2.out_channels,
        stride_w=conv1.stride[1],
    )
    return PopNetwork(config, conv1, conv2, head)
