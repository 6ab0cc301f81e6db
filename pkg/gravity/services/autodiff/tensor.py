"""
Tensor und Computation Tape

Minimaler Reverse-Mode Autodiff-Kern:
- Tensor: dichtes float64-Array mit Gradienten-Slot
- ComputationTape: geordnete Liste der aufgezeichneten Operationen
- backward(): traversiert das Tape rückwärts und akkumuliert Gradienten
  in die Blatt-Tensoren

Jeder Trainingslauf bzw. jeder Angriffs-Worker besitzt sein eigenes Tape.
Das aktive Tape wird über eine ContextVar verwaltet, dadurch haben Threads
automatisch getrennte Tapes.

Author: DSP Development Team
Version: 1.0.0
"""

import logging
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from ...exceptions import NonScalarLossError, NumericalDivergenceError

logger = logging.getLogger(__name__)

BackwardRule = Callable[[np.ndarray, Tuple[bool, ...]], Tuple[Optional[np.ndarray], ...]]

_active_tape: ContextVar[Optional["ComputationTape"]] = ContextVar('gravity_active_tape', default=None)
_grad_enabled: ContextVar[bool] = ContextVar('gravity_grad_enabled', default=True)


def nan_guard_enabled() -> bool:
    return bool(getattr(settings, 'GRAVITY_NAN_GUARD', True))


def check_finite(values: np.ndarray, where: str, phase: str) -> None:
    """Bricht bei NaN/Inf sofort mit einer Diagnose ab."""
    if nan_guard_enabled() and not np.all(np.isfinite(values)):
        logger.error(f"Nicht-endliche Werte in '{where}' ({phase})")
        raise NumericalDivergenceError(where, phase)


class Tensor:
    """
    Dichtes n-dimensionales float64-Array mit optionalem Gradienten.

    Attributes:
        data: numpy-Array (row-major, float64)
        grad: Gradient gleicher Form oder None
        requires_grad: ob Gradienten für diesen Tensor gesammelt werden
        name: optionaler Name (Parameter-Namen im Checkpoint)
    """

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.array(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._node: Optional["TapeNode"] = None

    @classmethod
    def _wrap(cls, data: np.ndarray, requires_grad: bool) -> "Tensor":
        tensor = cls.__new__(cls)
        tensor.data = np.ascontiguousarray(data, dtype=np.float64)
        tensor.grad = None
        tensor.requires_grad = requires_grad
        tensor.name = None
        tensor._node = None
        return tensor

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    # Operator-Überladungen delegieren an die Ops (lazy import wegen Zyklus)
    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __mul__(self, other):
        from . import ops
        if np.isscalar(other):
            return ops.scale(self, float(other))
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from . import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def as_tensor(value) -> Tensor:
    """Konstante Werte werden als Tensor ohne Gradient gewrappt."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False)


@dataclass(eq=False)
class TapeNode:
    """Eine aufgezeichnete Operation mit lokaler Rückwärtsregel."""
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule
    tape: Optional["ComputationTape"] = None
    index: int = -1


@dataclass(eq=False)
class ComputationTape:
    """
    Geordnete Liste der Operationen eines Laufs.

    Knoten werden in Ausführungsreihenfolge angehängt, dadurch stehen die
    Eingaben eines Knotens immer vor ihm (topologische Ordnung).
    """
    nodes: List[TapeNode] = field(default_factory=list)

    def record(self, node: TapeNode) -> None:
        node.tape = self
        node.index = len(self.nodes)
        self.nodes.append(node)

    def reset(self) -> None:
        for node in self.nodes:
            node.output._node = None
        self.nodes.clear()

    def __len__(self) -> int:
        return len(self.nodes)


def current_tape() -> Optional[ComputationTape]:
    """Das Tape des umgebenden recording()-Blocks, sonst None."""
    return _active_tape.get()


def grad_enabled() -> bool:
    return _grad_enabled.get()


@contextmanager
def recording(tape: Optional[ComputationTape] = None) -> Iterator[ComputationTape]:
    """
    Aktiviert ein frisches Tape für den Block, auch innerhalb von no_grad().

    Usage:
        with recording() as tape:
            loss = model_loss(...)
            backward(loss)
    """
    tape = tape if tape is not None else ComputationTape()
    token = _active_tape.set(tape)
    grad_token = _grad_enabled.set(True)
    try:
        yield tape
    finally:
        _grad_enabled.reset(grad_token)
        _active_tape.reset(token)
        tape.reset()


@contextmanager
def no_grad() -> Iterator[None]:
    """Deaktiviert die Aufzeichnung (Evaluation, Latent-Extraktion)."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


def make_output(op: str, inputs: Sequence[Tensor], data: np.ndarray, rule: BackwardRule) -> Tensor:
    """
    Erzeugt den Ausgabe-Tensor einer Op und zeichnet ihn bei Bedarf auf.

    Aufgezeichnet wird nur innerhalb von recording(); ein reiner Forward-Pass
    hinterlässt keine Knoten.
    """
    check_finite(data, op, 'forward')
    tape = current_tape()
    needs_grad = tape is not None and grad_enabled() and any(t.requires_grad for t in inputs)
    out = Tensor._wrap(data, requires_grad=needs_grad)
    if needs_grad:
        node = TapeNode(op=op, inputs=tuple(inputs), output=out, backward=rule)
        tape.record(node)
        out._node = node
    return out


def _accumulate_leaf(tensor: Tensor, grad: np.ndarray) -> None:
    if tensor.grad is None:
        tensor.grad = np.array(grad, dtype=np.float64, copy=True)
    else:
        tensor.grad = tensor.grad + grad


def backward(loss: Tensor, targets: Optional[Iterable[Tensor]] = None) -> None:
    """
    Berechnet d(loss)/d(tensor) für alle erreichbaren Blatt-Tensoren.

    Gradienten werden additiv akkumuliert; ein zweiter Aufruf auf demselben
    Tape verdoppelt die Gradienten also exakt.

    Args:
        loss: skalarer Tensor
        targets: optional; nur diese Blätter erhalten Gradienten (nicht
            erreichte Ziele bekommen Nullen). Ohne Angabe erhalten alle
            erreichbaren Blätter mit requires_grad einen Gradienten.

    Raises:
        NonScalarLossError: wenn loss mehr als ein Element hat
    """
    if loss.size != 1:
        raise NonScalarLossError(loss.shape)

    target_list = list(targets) if targets is not None else None
    target_ids = None if target_list is None else {id(t) for t in target_list}

    if loss._node is None:
        if loss.requires_grad and (target_ids is None or id(loss) in target_ids):
            _accumulate_leaf(loss, np.ones_like(loss.data))
    else:
        tape = loss._node.tape
        pending = {id(loss): np.ones_like(loss.data)}
        for node in reversed(tape.nodes[:loss._node.index + 1]):
            grad_out = pending.pop(id(node.output), None)
            if grad_out is None:
                continue
            needs = tuple(inp.requires_grad for inp in node.inputs)
            input_grads = node.backward(grad_out, needs)
            for inp, grad, need in zip(node.inputs, input_grads, needs):
                if not need or grad is None:
                    continue
                check_finite(grad, node.op, 'backward')
                if inp._node is not None:
                    key = id(inp)
                    pending[key] = pending[key] + grad if key in pending else grad
                elif target_ids is None or id(inp) in target_ids:
                    _accumulate_leaf(inp, grad)

    if target_list is not None:
        for tensor in target_list:
            if tensor.grad is None:
                tensor.grad = np.zeros_like(tensor.data)
