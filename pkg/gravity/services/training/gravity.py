"""
Adaptive-Gravity Trainingsschleife (Teacher/Student)

Pro Iteration k:
1. Centroids des Teachers an Head und Tail aus dem Trainings-Split extrahieren
2. Anti-Gravity-Kräfte pro Layer berechnen
3. Centroids mit G_head bzw. G_tail verschieben
4. Student mit dem Gravity-Loss trainieren, γ = Eval-Accuracy des Teachers;
   der Student wird zum Teacher der nächsten Iteration

Iteration 0 ist das Baseline-Modell (reiner Cross-Entropy-Loss).

Author: DSP Development Team
Version: 1.0.0
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ...exceptions import AttackConfigError, GravityException
from ..attacks.robustness import eval_batch_size
from ..attacks.white_box import AttackSpec
from ..autodiff.tensor import Tensor, no_grad
from ..data.dataset import Dataset, one_hot
from ..geometry.forces import MASS_MODES, ForceField, relocate_centroids, total_force
from ..geometry.masses import ClassMass, centroid_matrix, extract_centroids
from ..losses import gravity_loss
from ..metrics.icc_icd import ICC_MODES, compute_icc, compute_icd
from ..metrics.records import LAYERS, ICDTriple, IterationRecord, append_record
from ..models.networks import Model, build_model
from ..seeding import SeedStreams
from .trainer import AUGMENT_FAMILIES, ModelTrainer, TrainingConfig, evaluate_accuracy

logger = logging.getLogger(__name__)

RECORDS_FILENAME = 'records.jsonl'
CHECKPOINT_DIRNAME = 'checkpoints'


@dataclass
class GravityConfig:
    """
    Konfiguration der Gravity-Schleife.

    Attributes:
        G_head, G_tail: Gravitationskonstanten (Schrittweite der Centroids)
        iterations: Anzahl Gravity-Iterationen K
        epochs_per_iteration: Epochen Student-Training pro Iteration
        batch_size, learning_rate: ADAM-Training
        threshold: Accuracy-Schwelle θ für die Auswahl
        seed: Seed des Laufs
        adversarial: optionales Adversarial Training (fgsm | pgd)
        mass_mode: 'norm' (m_i m_j) oder 'elementwise' (σ_i ⊙ σ_j)
        icc_mode: 'mean_distance' oder 'spread_norm'
        warm_start: Student startet als Kopie des Teachers
    """
    G_head: float = 100.0
    G_tail: float = 200.0
    iterations: int = 50
    epochs_per_iteration: int = 2
    batch_size: int = 64
    learning_rate: float = 1e-4
    threshold: float = 0.9965
    seed: int = 0
    adversarial: Optional[AttackSpec] = None
    mass_mode: str = 'norm'
    icc_mode: str = 'mean_distance'
    warm_start: bool = True

    def g_for(self, layer: str) -> float:
        return self.G_head if layer == 'head' else self.G_tail

    def validate(self) -> "GravityConfig":
        errors = {}
        if self.iterations < 1:
            errors['iterations'] = 'must be >= 1'
        if not 0.0 < self.threshold < 1.0:
            errors['threshold'] = 'must be in (0, 1)'
        if self.G_head <= 0:
            errors['G_head'] = 'must be > 0'
        if self.G_tail <= 0:
            errors['G_tail'] = 'must be > 0'
        if self.epochs_per_iteration < 1:
            errors['epochs_per_iteration'] = 'must be >= 1'
        if self.mass_mode not in MASS_MODES:
            errors['mass_mode'] = f'must be one of {list(MASS_MODES)}'
        if self.icc_mode not in ICC_MODES:
            errors['icc_mode'] = f'must be one of {list(ICC_MODES)}'
        if errors:
            raise GravityException("Invalid gravity configuration", error_code='INVALID_GRAVITY_CONFIG',
                                   details=errors)
        if self.adversarial is not None and self.adversarial.family not in AUGMENT_FAMILIES:
            raise AttackConfigError(f"Adversarial training supports {list(AUGMENT_FAMILIES)}, "
                                    f"got '{self.adversarial.family}'")
        return self

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(
            epochs=self.epochs_per_iteration,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=self.seed,
            adversarial=self.adversarial,
        )


@dataclass
class LayerStats:
    """Massen, ICC und ICD eines Layers für ein Modell."""
    masses: List[ClassMass]
    icc: float
    icd: ICDTriple

    @property
    def centroids(self) -> np.ndarray:
        return centroid_matrix(self.masses)


@dataclass
class GravityState:
    """
    Zustand zwischen zwei Iterationen.

    Attributes:
        teacher: aktuelles Teacher-Modell (Modell der Iteration k)
        teacher_accuracy: dessen Eval-Accuracy (wird zu γ der nächsten Iteration)
        teacher_stats: Layer-Statistiken des Teachers auf dem Trainings-Split
        k: Index der zuletzt abgeschlossenen Iteration
        student: zuletzt trainierter Student (nach einer Iteration == teacher)
        targets: verschobene Centroids, mit denen der Student trainiert wurde
        force_fields: Kraftfelder der letzten Verschiebung
        gamma_history: γ jeder Iteration ab k=1
    """
    teacher: Model
    teacher_accuracy: float
    teacher_stats: Dict[str, LayerStats]
    k: int = 0
    student: Optional[Model] = None
    targets: Dict[str, np.ndarray] = field(default_factory=dict)
    force_fields: Dict[str, ForceField] = field(default_factory=dict)
    gamma_history: List[float] = field(default_factory=list)


@dataclass
class GravityRun:
    """Ergebnis von run_gravity: ein Modell und ein Record pro Iteration."""
    models: List[Model]
    records: List[IterationRecord]
    state: GravityState


def collect_latents(model: Model, inputs: np.ndarray, batch_size: Optional[int] = None) -> Dict[str, np.ndarray]:
    """Tail- und Head-Aktivierungen aller Samples (ohne Aufzeichnung)."""
    batch_size = batch_size or eval_batch_size()
    tails, heads = [], []
    with no_grad():
        for start in range(0, inputs.shape[0], batch_size):
            out = model.forward_with_latents(inputs[start:start + batch_size])
            tails.append(out.tail.data.reshape(out.tail.shape[0], -1))
            heads.append(out.head.data.reshape(out.head.shape[0], -1))
    return {'tail': np.concatenate(tails), 'head': np.concatenate(heads)}


def layer_statistics(model: Model, dataset: Dataset, icc_mode: str = 'mean_distance') -> Dict[str, LayerStats]:
    inputs, labels = dataset.split('train')
    latents = collect_latents(model, inputs)
    stats = {}
    for layer in LAYERS:
        masses = extract_centroids(latents[layer], labels, dataset.num_classes)
        stats[layer] = LayerStats(masses=masses, icc=compute_icc(masses, icc_mode), icd=compute_icd(masses))
    return stats


def build_record(k: int, accuracy: float, stats: Dict[str, LayerStats], gamma: Optional[float] = None,
                 checkpoint_path: Optional[str] = None) -> IterationRecord:
    return IterationRecord(
        k=k,
        accuracy=accuracy,
        icc={layer: stats[layer].icc for layer in LAYERS},
        icd={layer: stats[layer].icd for layer in LAYERS},
        centroids={layer: stats[layer].centroids for layer in LAYERS},
        gamma=gamma,
        checkpoint_path=checkpoint_path,
    ).validate()


def relocate_layer(masses: List[ClassMass], G: float, mass_mode: str = 'norm') -> Tuple[np.ndarray, ForceField]:
    """
    Verschiebt die Centroids eines Layers. Mit G == 0 bleiben sie unverändert,
    auch wenn alle Kräfte 0 sind.
    """
    field_ = total_force(masses, mass_mode=mass_mode)
    if G == 0:
        field_.steps = np.zeros_like(field_.forces)
        field_.G = 0.0
        return centroid_matrix(masses), field_
    relocated, _ = relocate_centroids(field_, masses, G)
    return np.stack(relocated), field_


def make_gravity_loss(targets: Dict[str, np.ndarray], gamma: float):
    def loss_fn(model: Model, inputs: np.ndarray, labels: np.ndarray) -> Tensor:
        out = model.forward_with_latents(inputs)
        return gravity_loss(out.logits, one_hot(labels, model.spec.num_classes), out.tail, out.head, targets, gamma)
    return loss_fn


def checkpoint_name(k: int) -> str:
    return f"{CHECKPOINT_DIRNAME}/iter_{k:03d}.agrv"


def checkpoint_path_for(output_dir: Union[str, Path], k: int) -> Path:
    return Path(output_dir) / checkpoint_name(k)


def save_checkpoint(model: Model, output_dir: Union[str, Path], k: int) -> str:
    """Speichert das Modell der Iteration k; Rückgabe ist der Pfad relativ zu output_dir."""
    model.save(checkpoint_path_for(output_dir, k))
    return checkpoint_name(k)


def initial_state(baseline: Model, dataset: Dataset, config: GravityConfig) -> Tuple[GravityState, IterationRecord]:
    """Iteration 0: misst das Baseline-Modell."""
    accuracy = evaluate_accuracy(baseline, dataset)
    stats = layer_statistics(baseline, dataset, config.icc_mode)
    record = build_record(0, accuracy, stats)
    return GravityState(teacher=baseline, teacher_accuracy=accuracy, teacher_stats=stats, k=0), record


def gravity_iteration(state: GravityState, config: GravityConfig, data: Dataset,
                      output_dir: Optional[Union[str, Path]] = None) -> Tuple[GravityState, IterationRecord]:
    """
    Führt eine Gravity-Iteration aus und gibt den neuen Zustand plus Record zurück.

    Raises:
        EmptyClassError: wenn eine Klasse im Trainings-Split fehlt
        AllZeroForcesError: wenn bei G > 0 keine Kraft wirkt
        NumericalDivergenceError: wenn der Loss NaN/Inf wird
    """
    k = state.k + 1
    gamma = float(state.teacher_accuracy)

    targets, force_fields = {}, {}
    for layer in LAYERS:
        targets[layer], force_fields[layer] = relocate_layer(
            state.teacher_stats[layer].masses, config.g_for(layer), config.mass_mode
        )

    if config.warm_start:
        student = state.teacher.clone()
    else:
        init_rng = SeedStreams(config.seed).rng('init', 'student', k)
        student = build_model(state.teacher.spec, rng=init_rng)

    trainer = ModelTrainer(student, config.training_config(), stream=('gravity', k))
    result = trainer.train(data, loss_fn=make_gravity_loss(targets, gamma))

    checkpoint = None
    if output_dir is not None:
        checkpoint = save_checkpoint(student, output_dir, k)

    stats = layer_statistics(student, data, config.icc_mode)
    record = build_record(k, result.eval_accuracy, stats, gamma=gamma, checkpoint_path=checkpoint)
    logger.info(
        f"Gravity-Iteration {k}: γ={gamma:.4f}, acc={record.accuracy:.4f}, "
        f"ICD_head(min)={record.icd['head'].min:.4f}, ICD_tail(min)={record.icd['tail'].min:.4f}"
    )

    new_state = GravityState(
        teacher=student,
        teacher_accuracy=record.accuracy,
        teacher_stats=stats,
        k=k,
        student=student,
        targets=targets,
        force_fields=force_fields,
        gamma_history=state.gamma_history + [gamma],
    )
    return new_state, record


def run_gravity(config: GravityConfig, dataset: Dataset, baseline: Model,
                output_dir: Optional[Union[str, Path]] = None) -> GravityRun:
    """
    Führt K Gravity-Iterationen aus. Record 0 beschreibt das Baseline-Modell.

    Mit output_dir werden Records (JSON-Lines) und Checkpoints pro Iteration
    geschrieben.
    """
    state, record = initial_state(baseline, dataset, config)
    records_path = None
    if output_dir is not None:
        record.checkpoint_path = save_checkpoint(baseline, output_dir, 0)
        records_path = Path(output_dir) / RECORDS_FILENAME
        records_path.parent.mkdir(parents=True, exist_ok=True)
        records_path.write_text('')
        append_record(records_path, record)

    models, records = [baseline], [record]
    for _ in range(config.iterations):
        state, record = gravity_iteration(state, config, dataset, output_dir=output_dir)
        models.append(state.student)
        records.append(record)
        if records_path is not None:
            append_record(records_path, record)

    logger.info(f"Gravity-Lauf abgeschlossen: {config.iterations} Iterationen")
    return GravityRun(models=models, records=records, state=state)
