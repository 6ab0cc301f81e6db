"""
ADAM Optimizer für die Autodiff-Parameter.
"""

import logging
from typing import Dict, List, Sequence

import numpy as np

from ...exceptions import MissingGradientError
from .tensor import Tensor

logger = logging.getLogger(__name__)


class AdamOptimizer:
    """
    ADAM mit Bias-Korrektur; die Momente liegen pro Parameter im Optimizer.

    Usage:
        optimizer = AdamOptimizer(model.parameters(), lr=1e-4)
        ...
        backward(loss)
        optimizer.step()
        optimizer.zero_grad()
    """

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params: List[Tensor] = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m: Dict[int, np.ndarray] = {id(p): np.zeros_like(p.data) for p in self.params}
        self._v: Dict[int, np.ndarray] = {id(p): np.zeros_like(p.data) for p in self.params}

    def step(self) -> None:
        """
        Führt ein ADAM-Update in-place aus.

        Raises:
            MissingGradientError: wenn ein Parameter keinen Gradienten hat
        """
        missing = [p.name or f"param[{i}]" for i, p in enumerate(self.params) if p.grad is None]
        if missing:
            raise MissingGradientError(missing)

        self.step_count += 1
        bias1 = 1.0 - self.beta1 ** self.step_count
        bias2 = 1.0 - self.beta2 ** self.step_count
        for param in self.params:
            key = id(param)
            grad = param.grad
            self._m[key] = self.beta1 * self._m[key] + (1.0 - self.beta1) * grad
            self._v[key] = self.beta2 * self._v[key] + (1.0 - self.beta2) * grad * grad
            m_hat = self._m[key] / bias1
            v_hat = self._v[key] / bias2
            param.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        for param in self.params:
            param.grad = None


def sgd_adam_step(optimizer: AdamOptimizer) -> None:
    """Ein Optimierungsschritt; Kurzform für optimizer.step()."""
    optimizer.step()
