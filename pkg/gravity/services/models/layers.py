"""
Layer-Bausteine auf Basis der Autodiff-Ops.

Initialisierung: Kaiming-uniform (Grenze sqrt(6 / fan_in)) für Gewichte,
Null für Biases, 0.25 für die PReLU-Steigung.
"""

from typing import Dict

import numpy as np

from ..autodiff import ops
from ..autodiff.tensor import Tensor
from .spec import LayerSpec


def kaiming_uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Layer:
    """Basisklasse: parameterlos, Identität."""

    def __init__(self, spec: LayerSpec):
        self.spec = spec

    def parameters(self) -> Dict[str, Tensor]:
        return {}

    def forward(self, x: Tensor) -> Tensor:
        raise NotImplementedError


class Conv2d(Layer):
    def __init__(self, spec: LayerSpec, rng: np.random.Generator):
        super().__init__(spec)
        c_in, c_out, k = spec.dims['in_channels'], spec.dims['out_channels'], spec.dims['kernel']
        self.weight = Tensor(kaiming_uniform(rng, (c_out, c_in, k, k), c_in * k * k), requires_grad=True)
        self.bias = Tensor(np.zeros(c_out), requires_grad=True)

    def parameters(self):
        return {'weight': self.weight, 'bias': self.bias}

    def forward(self, x):
        return ops.conv2d(x, self.weight, self.bias)


class Linear(Layer):
    def __init__(self, spec: LayerSpec, rng: np.random.Generator):
        super().__init__(spec)
        n_in, n_out = spec.dims['in_features'], spec.dims['out_features']
        self.weight = Tensor(kaiming_uniform(rng, (n_in, n_out), n_in), requires_grad=True)
        self.bias = Tensor(np.zeros(n_out), requires_grad=True)

    def parameters(self):
        return {'weight': self.weight, 'bias': self.bias}

    def forward(self, x):
        return ops.add(ops.matmul(x, self.weight), self.bias)


class PReLU(Layer):
    def __init__(self, spec: LayerSpec, rng: np.random.Generator):
        super().__init__(spec)
        self.slope = Tensor(np.full(1, 0.25), requires_grad=True)

    def parameters(self):
        return {'slope': self.slope}

    def forward(self, x):
        return ops.prelu(x, self.slope)


class ReLU(Layer):
    def forward(self, x):
        return ops.relu(x)


class MaxPool2d(Layer):
    def forward(self, x):
        return ops.maxpool2d(x)


class Flatten(Layer):
    def forward(self, x):
        return ops.flatten(x)


def build_layer(spec: LayerSpec, rng: np.random.Generator) -> Layer:
    if spec.kind == 'conv2d':
        return Conv2d(spec, rng)
    if spec.kind == 'linear':
        return Linear(spec, rng)
    if spec.kind == 'prelu':
        return PReLU(spec, rng)
    return {'relu': ReLU, 'maxpool2d': MaxPool2d, 'flatten': Flatten}[spec.kind](spec)
