"""
ModelSpec - deklarative Beschreibung eines Klassifikators

Eine ModelSpec listet die Layer (Art, Dimensionen, Tag) und legt fest,
welche Layer als Tail bzw. Head markiert sind. Die Spec wird als JSON neben
jedem Checkpoint abgelegt, damit Experimente deklarativ bleiben.

Author: DSP Development Team
Version: 1.0.0
"""

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from ...exceptions import ModelSpecError

LAYER_KINDS = ('conv2d', 'maxpool2d', 'relu', 'prelu', 'flatten', 'linear')
TAG_KINDS = ('head', 'tail', 'plain')


@dataclass(frozen=True)
class LayerTag:
    """Markierung eines Layers; head entspricht l = -1, tail l = i."""
    kind: str
    index: int


@dataclass
class LayerSpec:
    """Ein Layer der Spec: Art, Dimensionen und Tag."""
    kind: str
    dims: Dict[str, int] = field(default_factory=dict)
    tag: str = 'plain'


@dataclass
class ModelSpec:
    """
    Architektur eines Klassifikators.

    Attributes:
        name: Modellname (z.B. "lenet_lite", "mlp")
        layers: Layer in Forward-Reihenfolge
        input_shape: Form eines einzelnen Samples
        num_classes: Anzahl Klassen N
    """
    name: str
    layers: List[LayerSpec]
    input_shape: Tuple[int, ...]
    num_classes: int

    def __post_init__(self):
        self.input_shape = tuple(int(d) for d in self.input_shape)
        self.layers = [layer if isinstance(layer, LayerSpec) else LayerSpec(**layer) for layer in self.layers]

    # --- Tags ---

    def tags(self) -> List[LayerTag]:
        return [LayerTag(kind=layer.tag, index=i) for i, layer in enumerate(self.layers) if layer.tag != 'plain']

    @property
    def head_index(self) -> int:
        return next(i for i, layer in enumerate(self.layers) if layer.tag == 'head')

    @property
    def tail_index(self) -> int:
        return next(i for i, layer in enumerate(self.layers) if layer.tag == 'tail')

    # --- Validierung ---

    def output_shapes(self) -> List[Tuple[int, ...]]:
        """Inferiert die Ausgabeform (ohne Batch) jedes Layers."""
        shape = self.input_shape
        shapes = []
        for i, layer in enumerate(self.layers):
            shape = _infer_shape(layer, shape, i)
            shapes.append(shape)
        return shapes

    def validate(self) -> "ModelSpec":
        """
        Prüft die Invarianten der Spec.

        Raises:
            ModelSpecError: bei unbekannten Layern, falschen Tags oder
                inkonsistenten Dimensionen
        """
        for i, layer in enumerate(self.layers):
            if layer.kind not in LAYER_KINDS:
                raise ModelSpecError(f"Layer {i}: unknown kind '{layer.kind}'")
            if layer.tag not in TAG_KINDS:
                raise ModelSpecError(f"Layer {i}: unknown tag '{layer.tag}'")
        heads = [t for t in self.tags() if t.kind == 'head']
        tails = [t for t in self.tags() if t.kind == 'tail']
        if len(heads) != 1 or len(tails) != 1:
            raise ModelSpecError(
                f"Model '{self.name}' needs exactly one head and one tail (found {len(heads)} head, {len(tails)} tail)"
            )
        if tails[0].index >= heads[0].index:
            raise ModelSpecError(f"Tail layer {tails[0].index} must precede head layer {heads[0].index}")
        if heads[0].index != len(self.layers) - 1:
            raise ModelSpecError("The head must be the final pre-softmax layer")
        shapes = self.output_shapes()
        if shapes[-1] != (self.num_classes,):
            raise ModelSpecError(f"Final layer outputs {shapes[-1]}, expected ({self.num_classes},)")
        return self

    # --- Serialisierung ---

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'input_shape': list(self.input_shape),
            'num_classes': self.num_classes,
            'layers': [asdict(layer) for layer in self.layers],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelSpec":
        try:
            return cls(
                name=data['name'],
                layers=[LayerSpec(kind=l['kind'], dims=dict(l.get('dims', {})), tag=l.get('tag', 'plain'))
                        for l in data['layers']],
                input_shape=tuple(data['input_shape']),
                num_classes=int(data['num_classes']),
            ).validate()
        except (KeyError, TypeError) as e:
            raise ModelSpecError(f"Malformed model spec: {e}")

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding='utf-8')
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ModelSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding='utf-8')))


def _infer_shape(layer: LayerSpec, shape: Tuple[int, ...], index: int) -> Tuple[int, ...]:
    dims = layer.dims
    if layer.kind == 'conv2d':
        if len(shape) != 3 or shape[0] != dims['in_channels']:
            raise ModelSpecError(f"Layer {index} (conv2d) cannot take input {shape}")
        k = dims['kernel']
        out = (dims['out_channels'], shape[1] - k + 1, shape[2] - k + 1)
        if min(out) < 1:
            raise ModelSpecError(f"Layer {index} (conv2d) kernel {k} too large for {shape}")
        return out
    if layer.kind == 'maxpool2d':
        if len(shape) != 3 or shape[1] < 2 or shape[2] < 2:
            raise ModelSpecError(f"Layer {index} (maxpool2d) cannot take input {shape}")
        return (shape[0], shape[1] // 2, shape[2] // 2)
    if layer.kind == 'flatten':
        size = 1
        for d in shape:
            size *= d
        return (size,)
    if layer.kind == 'linear':
        if shape != (dims['in_features'],):
            raise ModelSpecError(f"Layer {index} (linear) expects ({dims['in_features']},), got {shape}")
        return (dims['out_features'],)
    return shape
