"""
White-Box-Angriffe im L∞-Ball

Alle Angriffe maximieren den Cross-Entropy-Loss des Modells bezüglich der
Eingabe und projizieren nach jedem Schritt in den ε-Ball um das Original und
in den Wertebereich [0,1]:

- FGSM: ein Schritt der Größe ε in Richtung sign(∇)
- BIM:  `steps` Schritte der Größe step_size
- MIM:  wie BIM, aber mit Momentum g <- μ g + ∇ / ||∇||₁
- PGD:  wie BIM, optional mit gleichverteiltem Start im ε-Ball

Author: DSP Development Team
Version: 1.0.0
"""

import logging
from dataclasses import dataclass, asdict
from typing import Dict, Optional

import numpy as np

from ...exceptions import AttackConfigError
from ..autodiff.tensor import Tensor, backward, recording
from ..data.dataset import one_hot
from ..losses import cross_entropy_loss
from ..models.networks import Model

logger = logging.getLogger(__name__)

FAMILIES = ('fgsm', 'bim', 'mim', 'pgd')
RESERVED_FAMILIES = ('cw',)
ITERATIVE_FAMILIES = ('bim', 'mim', 'pgd')
DEFAULT_STEPS = 10
DEFAULT_DECAY = 1.0


@dataclass(frozen=True)
class AttackSpec:
    """
    Angriffsfamilie plus Parameter.

    Attributes:
        family: fgsm | bim | mim | pgd
        epsilon: L∞-Budget in Eingabe-Einheiten
        step_size: Schrittweite pro Iteration (Standard ε/4)
        steps: Anzahl Iterationen (Standard 10; FGSM immer 1)
        decay: Momentum μ (nur MIM)
        random_start: gleichverteilter Start im ε-Ball (nur PGD)
        seed: Seed für den Random Start
    """
    family: str
    epsilon: float
    step_size: Optional[float] = None
    steps: int = DEFAULT_STEPS
    decay: float = DEFAULT_DECAY
    random_start: bool = True
    seed: int = 0

    @property
    def resolved_step_size(self) -> float:
        return float(self.step_size) if self.step_size is not None else self.epsilon / 4.0

    @property
    def resolved_steps(self) -> int:
        return 1 if self.family == 'fgsm' else int(self.steps)

    def validate(self) -> "AttackSpec":
        if self.family in RESERVED_FAMILIES:
            raise AttackConfigError(f"Attack family '{self.family}' is reserved but not implemented",
                                    details={'family': self.family})
        if self.family not in FAMILIES:
            raise AttackConfigError(f"Unknown attack family '{self.family}'",
                                    details={'family': self.family, 'allowed': list(FAMILIES)})
        if self.epsilon < 0:
            raise AttackConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.steps < 1:
            raise AttackConfigError(f"steps must be >= 1, got {self.steps}")
        if self.family in ITERATIVE_FAMILIES and self.epsilon > 0 and self.resolved_step_size <= 0:
            raise AttackConfigError(f"step_size must be > 0 for {self.family}")
        if self.decay < 0:
            raise AttackConfigError(f"decay must be >= 0, got {self.decay}")
        return self

    def label(self) -> str:
        return f"{self.family}_eps{self.epsilon:g}"

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['step_size'] = self.resolved_step_size
        data['steps'] = self.resolved_steps
        return data


def input_gradient(model: Model, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """∇_x des Cross-Entropy-Losses; die Modellparameter bleiben unverändert."""
    with recording():
        x_t = Tensor(x, requires_grad=True)
        loss = cross_entropy_loss(model.forward(x_t), one_hot(np.asarray(y), model.spec.num_classes))
        backward(loss, targets=[x_t])
        return x_t.grad


def _project(candidate: np.ndarray, x: np.ndarray, epsilon: float) -> np.ndarray:
    return np.clip(np.clip(candidate, x - epsilon, x + epsilon), 0.0, 1.0)


def _iterate(model: Model, x: np.ndarray, y: np.ndarray, start: np.ndarray, spec: AttackSpec,
             momentum: bool = False) -> np.ndarray:
    x_adv = start
    step = spec.resolved_step_size
    accumulated = np.zeros_like(x)
    for _ in range(spec.resolved_steps):
        grad = input_gradient(model, x_adv, y)
        if momentum:
            l1 = np.abs(grad).reshape(grad.shape[0], -1).sum(axis=1)
            l1 = np.where(l1 > 0, l1, 1.0).reshape((-1,) + (1,) * (grad.ndim - 1))
            accumulated = spec.decay * accumulated + grad / l1
            direction = np.sign(accumulated)
        else:
            direction = np.sign(grad)
        x_adv = _project(x_adv + step * direction, x, spec.epsilon)
    return x_adv


def fgsm(model: Model, x: np.ndarray, y: np.ndarray, epsilon: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    grad = input_gradient(model, x, y)
    return _project(x + epsilon * np.sign(grad), x, epsilon)


def bim(model: Model, x: np.ndarray, y: np.ndarray, spec: AttackSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return _iterate(model, x, y, x, spec)


def mim(model: Model, x: np.ndarray, y: np.ndarray, spec: AttackSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return _iterate(model, x, y, x, spec, momentum=True)


def pgd(model: Model, x: np.ndarray, y: np.ndarray, spec: AttackSpec,
        rng: Optional[np.random.Generator] = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    start = x
    if spec.random_start and spec.epsilon > 0:
        rng = rng if rng is not None else np.random.default_rng(spec.seed)
        start = _project(x + rng.uniform(-spec.epsilon, spec.epsilon, size=x.shape), x, spec.epsilon)
    return _iterate(model, x, y, start, spec)


def run_attack(model: Model, x: np.ndarray, y: np.ndarray, spec: AttackSpec,
               rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Führt den Angriff der in `spec` genannten Familie aus."""
    spec.validate()
    if spec.family == 'fgsm':
        return fgsm(model, x, y, spec.epsilon)
    if spec.family == 'bim':
        return bim(model, x, y, spec)
    if spec.family == 'mim':
        return mim(model, x, y, spec)
    return pgd(model, x, y, spec, rng=rng)
