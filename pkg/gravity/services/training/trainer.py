"""
Modell-Training mit ADAM

Stellt das generische Mini-Batch-Training bereit, das sowohl für das
Baseline-Training (Iteration 0, reiner Cross-Entropy-Loss) als auch für das
Student-Training der Gravity-Iterationen (Gravity-Loss) verwendet wird.
Optional wird jeder Batch um adversariale Beispiele ergänzt
(Adversarial Training mit FGSM oder PGD).

Author: DSP Development Team
Version: 1.0.0
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from ...exceptions import AttackConfigError, NumericalDivergenceError
from ..attacks.robustness import eval_batch_size
from ..attacks.white_box import AttackSpec, run_attack
from ..autodiff.optim import AdamOptimizer
from ..autodiff.tensor import Tensor, backward, recording
from ..data.batching import batches
from ..data.dataset import Dataset, one_hot
from ..losses import cross_entropy_loss
from ..models.networks import Model
from ..seeding import SeedStreams

logger = logging.getLogger(__name__)

AUGMENT_FAMILIES = ('fgsm', 'pgd')

LossFn = Callable[[Model, np.ndarray, np.ndarray], Tensor]


@dataclass
class TrainingConfig:
    """
    Hyperparameter eines Trainingslaufs.

    Defaults entsprechen dem MNIST-Setup: Batch-Größe 64, ADAM mit lr 1e-4.
    """
    epochs: int = 2
    batch_size: int = 64
    learning_rate: float = 1e-4
    seed: int = 0
    adversarial: Optional[AttackSpec] = None


@dataclass
class TrainingResult:
    """Ergebnis eines Trainingslaufs."""
    epochs: int
    steps: int
    loss_history: List[float] = field(default_factory=list)
    eval_accuracy: Optional[float] = None

    @property
    def final_loss(self) -> Optional[float]:
        return self.loss_history[-1] if self.loss_history else None


def default_loss(model: Model, inputs: np.ndarray, labels: np.ndarray) -> Tensor:
    return cross_entropy_loss(model.forward(inputs), one_hot(labels, model.spec.num_classes))


def adversarial_augment(model: Model, inputs: np.ndarray, labels: np.ndarray, attack_spec: AttackSpec,
                        rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Hängt an den Batch seine adversarialen Gegenstücke (gegen das aktuelle
    Modell erzeugt) an; die Labels bleiben erhalten.

    Raises:
        AttackConfigError: wenn die Familie nicht fgsm oder pgd ist
    """
    if attack_spec.family not in AUGMENT_FAMILIES:
        raise AttackConfigError(
            f"Adversarial training supports {list(AUGMENT_FAMILIES)}, got '{attack_spec.family}'",
            details={'family': attack_spec.family},
        )
    adversarial = run_attack(model, inputs, labels, attack_spec, rng=rng)
    return np.concatenate([inputs, adversarial]), np.concatenate([labels, labels])


def evaluate_accuracy(model: Model, dataset: Dataset, split: str = 'eval') -> float:
    inputs, labels = dataset.split(split)
    return model.accuracy(inputs, labels, eval_batch_size())


class ModelTrainer:
    """
    Mini-Batch-Training eines Modells.

    Usage:
        trainer = ModelTrainer(model, TrainingConfig(epochs=3, seed=7))
        result = trainer.train(dataset)
    """

    def __init__(self, model: Model, config: TrainingConfig, stream: Tuple = ('baseline',)):
        self.model = model
        self.config = config
        self.stream = stream
        self.streams = SeedStreams(config.seed).for_path(*stream)
        self.optimizer = AdamOptimizer(model.parameters(), lr=config.learning_rate)
        self.logger = logger

    def _step(self, inputs: np.ndarray, labels: np.ndarray, loss_fn: LossFn) -> float:
        with recording():
            loss = loss_fn(self.model, inputs, labels)
            value = loss.item()
            if not np.isfinite(value):
                raise NumericalDivergenceError('/'.join(str(s) for s in self.stream), 'loss')
            self.optimizer.zero_grad()
            backward(loss)
        self.optimizer.step()
        return value

    def train(self, dataset: Dataset, loss_fn: Optional[LossFn] = None, evaluate: bool = True) -> TrainingResult:
        """
        Trainiert für config.epochs Epochen über den Trainings-Split.

        Raises:
            NumericalDivergenceError: wenn der Loss NaN/Inf wird
        """
        loss_fn = loss_fn or default_loss
        result = TrainingResult(epochs=self.config.epochs, steps=0)
        shuffle_seed = self.streams.seed
        attack_rng = self.streams.rng('adversarial')

        for epoch in range(self.config.epochs):
            epoch_losses = []
            for batch in batches(dataset, 'train', self.config.batch_size, seed=shuffle_seed, epoch=epoch):
                inputs, labels = batch.inputs, batch.labels
                if self.config.adversarial is not None:
                    inputs, labels = adversarial_augment(self.model, inputs, labels,
                                                         self.config.adversarial, rng=attack_rng)
                epoch_losses.append(self._step(inputs, labels, loss_fn))
                result.steps += 1
            mean_loss = float(np.mean(epoch_losses)) if epoch_losses else float('nan')
            result.loss_history.append(mean_loss)
            self.logger.info(f"[{'/'.join(str(s) for s in self.stream)}] Epoche {epoch + 1}/{self.config.epochs}: "
                             f"Loss {mean_loss:.6f}")

        if evaluate:
            result.eval_accuracy = evaluate_accuracy(self.model, dataset)
            self.logger.info(f"Eval-Accuracy: {result.eval_accuracy:.4f}")
        return result


def train_baseline(model: Model, dataset: Dataset, config: TrainingConfig) -> TrainingResult:
    """Iteration 0: Training mit reinem Cross-Entropy-Loss."""
    return ModelTrainer(model, config, stream=('baseline',)).train(dataset)
