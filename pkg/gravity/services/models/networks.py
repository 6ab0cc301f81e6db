"""
Klassifikatoren mit Head- und Tail-Layer

Stellt die beiden Desk-Scale-Architekturen bereit:
- LeNet-lite (MNIST): Conv(6,5x5)+ReLU+Pool -> Conv(16,5x5)+PReLU+Pool
  -> FC(120) [Tail] -> FC(84) -> FC(10) [Head]
- MLP (synthetische Blobs bzw. Substitut-Modell)

Die Aktivierungen an Tail und Head werden beim Forward-Pass mitgeschnitten,
ohne die Berechnung zu verändern. Softmax wird extern im Loss angewendet.

Author: DSP Development Team
Version: 1.0.0
"""

import copy
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ...exceptions import ModelSpecError, ShapeMismatchError, CheckpointFormatError
from ..autodiff.checkpoint import load_parameters, save_parameters
from ..autodiff.tensor import Tensor, as_tensor, no_grad
from .layers import Layer, build_layer
from .spec import LayerSpec, ModelSpec

logger = logging.getLogger(__name__)

LENET_INPUT_SHAPE = (1, 28, 28)


@dataclass
class LatentOutput:
    """Logits plus die Aktivierungen an Tail und Head."""
    logits: Tensor
    tail: Tensor
    head: Tensor


class Model:
    """
    Sequenzielles Modell, aufgebaut aus einer ModelSpec.

    Usage:
        model = build_lenet_lite(seed=7)
        out = model.forward_with_latents(images)
        out.tail.shape  # (B, 120)
    """

    def __init__(self, spec: ModelSpec, layers: List[Layer]):
        self.spec = spec
        self.layers = layers

    # --- Parameter ---

    def named_parameters(self) -> Dict[str, Tensor]:
        named = {}
        for i, layer in enumerate(self.layers):
            for pname, tensor in layer.parameters().items():
                tensor.name = f"layers.{i}.{pname}"
                named[tensor.name] = tensor
        return named

    def parameters(self) -> List[Tensor]:
        return list(self.named_parameters().values())

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: tensor.data.copy() for name, tensor in self.named_parameters().items()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        named = self.named_parameters()
        if set(state) != set(named):
            raise CheckpointFormatError(
                f"Checkpoint parameters {sorted(state)} do not match model parameters {sorted(named)}"
            )
        for name, tensor in named.items():
            if state[name].shape != tensor.shape:
                raise CheckpointFormatError(f"Parameter {name}: shape {state[name].shape} != {tensor.shape}")
            tensor.data = np.array(state[name], dtype=np.float64, copy=True)
            tensor.grad = None

    def zero_grad(self) -> None:
        for tensor in self.parameters():
            tensor.grad = None

    def clone(self) -> "Model":
        """Parameter-identische, vollständig unabhängige Kopie."""
        return copy.deepcopy(self)

    # --- Forward ---

    def _check_input(self, x: Tensor) -> None:
        if x.shape[1:] != self.spec.input_shape:
            raise ShapeMismatchError(
                f"{self.spec.name}.forward", [x.shape, (None,) + self.spec.input_shape],
                "input does not match model input shape"
            )

    def forward_with_latents(self, inputs) -> LatentOutput:
        x = as_tensor(inputs)
        self._check_input(x)
        tail_index, head_index = self.spec.tail_index, self.spec.head_index
        tail = head = None
        for i, layer in enumerate(self.layers):
            x = layer.forward(x)
            if i == tail_index:
                tail = x
            if i == head_index:
                head = x
        return LatentOutput(logits=x, tail=tail, head=head)

    def forward(self, inputs) -> Tensor:
        return self.forward_with_latents(inputs).logits

    __call__ = forward

    def predict(self, inputs: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Vorhergesagte Klassen, batchweise ohne Aufzeichnung."""
        inputs = np.asarray(inputs, dtype=np.float64)
        predictions = []
        with no_grad():
            for start in range(0, inputs.shape[0], batch_size):
                logits = self.forward(inputs[start:start + batch_size])
                predictions.append(np.argmax(logits.data, axis=1))
        if not predictions:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(predictions).astype(np.int64)

    def accuracy(self, inputs: np.ndarray, labels: np.ndarray, batch_size: int = 256) -> float:
        labels = np.asarray(labels)
        if labels.size == 0:
            return 0.0
        return float(np.mean(self.predict(inputs, batch_size) == labels))

    # --- Persistenz ---

    def save(self, path: Union[str, Path]) -> Path:
        """Schreibt Parameter (AGRV) und die Spec als JSON daneben."""
        path = Path(path)
        save_parameters(path, self.state_dict())
        self.spec.save(spec_path_for(path))
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Model":
        """
        Lädt Checkpoint und Spec.

        Raises:
            CheckpointFormatError: wenn eine der beiden Dateien fehlt, nicht
                lesbar ist oder die Spec kein gültiges JSON enthält
            ModelSpecError: wenn die Spec unvollständig ist
        """
        path = Path(path)
        spec_path = spec_path_for(path)
        try:
            spec = ModelSpec.load(spec_path)
            state = load_parameters(path)
        except json.JSONDecodeError as e:
            raise CheckpointFormatError(f"Model spec {spec_path} is not valid JSON: {e}")
        except (OSError, UnicodeDecodeError) as e:
            raise CheckpointFormatError(f"Cannot read checkpoint {path}: {e}")
        model = build_model(spec, rng=np.random.default_rng(0))
        model.load_state_dict(state)
        return model


def spec_path_for(checkpoint_path: Path) -> Path:
    return checkpoint_path.with_suffix('.spec.json')


def forward_with_latents(model: Model, inputs) -> Tuple[Tensor, Tensor, Tensor]:
    out = model.forward_with_latents(inputs)
    return out.logits, out.tail, out.head


def build_model(spec: ModelSpec, rng: Optional[np.random.Generator] = None, seed: int = 0) -> Model:
    """Instanziiert ein Modell aus einer validierten Spec."""
    spec.validate()
    rng = rng if rng is not None else np.random.default_rng(seed)
    layers = [build_layer(layer_spec, rng) for layer_spec in spec.layers]
    model = Model(spec, layers)
    model.named_parameters()
    return model


def lenet_lite_spec(input_shape: Sequence[int] = LENET_INPUT_SHAPE, num_classes: int = 10) -> ModelSpec:
    input_shape = tuple(input_shape)
    if input_shape != LENET_INPUT_SHAPE:
        raise ModelSpecError(f"LeNet-lite supports input shape {LENET_INPUT_SHAPE}, got {input_shape}")
    if num_classes < 2:
        raise ModelSpecError(f"LeNet-lite needs at least 2 classes, got {num_classes}")
    layers = [
        LayerSpec('conv2d', {'in_channels': 1, 'out_channels': 6, 'kernel': 5}),
        LayerSpec('relu'),
        LayerSpec('maxpool2d'),
        LayerSpec('conv2d', {'in_channels': 6, 'out_channels': 16, 'kernel': 5}),
        LayerSpec('prelu'),
        LayerSpec('maxpool2d'),
        LayerSpec('flatten'),
        LayerSpec('linear', {'in_features': 16 * 4 * 4, 'out_features': 120}, tag='tail'),
        LayerSpec('relu'),
        LayerSpec('linear', {'in_features': 120, 'out_features': 84}),
        LayerSpec('relu'),
        LayerSpec('linear', {'in_features': 84, 'out_features': num_classes}, tag='head'),
    ]
    return ModelSpec('lenet_lite', layers, input_shape, num_classes).validate()


def mlp_spec(input_shape: Sequence[int], hidden_dims: Sequence[int], num_classes: int, name: str = 'mlp') -> ModelSpec:
    """
    Vollverbundenes ReLU-Netz; der letzte Hidden-Layer ist Tail, der finale
    Linear-Layer ist Head. Bild-Eingaben werden zuerst geflattet.
    """
    hidden_dims = [int(h) for h in hidden_dims]
    if not hidden_dims:
        raise ModelSpecError("MLP needs at least one hidden layer")
    input_shape = tuple(int(d) for d in input_shape)
    layers: List[LayerSpec] = []
    width = 1
    for d in input_shape:
        width *= d
    if len(input_shape) > 1:
        layers.append(LayerSpec('flatten'))
    for i, hidden in enumerate(hidden_dims):
        tag = 'tail' if i == len(hidden_dims) - 1 else 'plain'
        layers.append(LayerSpec('linear', {'in_features': width, 'out_features': hidden}, tag=tag))
        layers.append(LayerSpec('relu'))
        width = hidden
    layers.append(LayerSpec('linear', {'in_features': width, 'out_features': num_classes}, tag='head'))
    return ModelSpec(name, layers, input_shape, num_classes).validate()


def build_lenet_lite(input_shape: Sequence[int] = LENET_INPUT_SHAPE, num_classes: int = 10,
                     rng: Optional[np.random.Generator] = None, seed: int = 0) -> Model:
    return build_model(lenet_lite_spec(input_shape, num_classes), rng=rng, seed=seed)


def build_mlp(input_shape: Sequence[int], hidden_dims: Sequence[int], num_classes: int,
              rng: Optional[np.random.Generator] = None, seed: int = 0) -> Model:
    return build_model(mlp_spec(input_shape, hidden_dims, num_classes), rng=rng, seed=seed)


def build_mlp_blobs(input_dim: int, hidden_dims: Sequence[int], num_classes: int,
                    rng: Optional[np.random.Generator] = None, seed: int = 0) -> Model:
    return build_mlp((int(input_dim),), hidden_dims, num_classes, rng=rng, seed=seed)
