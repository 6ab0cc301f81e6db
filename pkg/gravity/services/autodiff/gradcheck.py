"""
Gradient-Check gegen zentrale finite Differenzen.

Wird von den Tests als Orakel für backward() verwendet.
"""

from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from .tensor import Tensor, backward, no_grad, recording


@dataclass
class GradientCheckResult:
    """Ergebnis eines Gradient-Checks."""
    max_relative_error: float
    checked_entries: int
    worst_tensor: str

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_relative_error < tolerance


def gradient_check(
    loss_fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    step: float = 1e-5,
    floor: float = 1e-6,
) -> GradientCheckResult:
    """
    Vergleicht backward()-Gradienten mit zentralen finiten Differenzen.

    Der relative Fehler wird als |a - n| / max(|a| + |n|, floor) gemessen,
    damit Nullgradienten nicht durch Null geteilt werden.

    Args:
        loss_fn: baut den skalaren Loss aus den aktuellen Tensorwerten
        tensors: zu prüfende Blatt-Tensoren (requires_grad=True)
        step: Schrittweite h
        floor: Untergrenze des Nenners

    Returns:
        GradientCheckResult mit dem maximalen relativen Fehler
    """
    for tensor in tensors:
        tensor.grad = None
    with recording():
        loss = loss_fn()
        backward(loss, targets=tensors)
    analytic: List[np.ndarray] = [t.grad.copy() for t in tensors]

    worst, worst_name, count = 0.0, "", 0
    for index, tensor in enumerate(tensors):
        flat = tensor.data.reshape(-1)
        grad_flat = analytic[index].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            with no_grad():
                flat[i] = original + step
                plus = loss_fn().item()
                flat[i] = original - step
                minus = loss_fn().item()
            flat[i] = original
            numeric = (plus - minus) / (2.0 * step)
            error = abs(grad_flat[i] - numeric) / max(abs(grad_flat[i]) + abs(numeric), floor)
            count += 1
            if error > worst:
                worst, worst_name = error, tensor.name or f"tensor[{index}]"
    for tensor in tensors:
        tensor.grad = None
    return GradientCheckResult(max_relative_error=worst, checked_entries=count, worst_tensor=worst_name)
