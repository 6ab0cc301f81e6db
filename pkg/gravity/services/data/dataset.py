"""
Dataset-Container und deterministische Splits.

Author: DSP Development Team
Version: 1.0.0
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ...exceptions import DatasetError, UnknownSplitError

logger = logging.getLogger(__name__)

SPLITS = ('train', 'eval')


@dataclass
class SampleSet:
    """Ungeteilte Samples (z.B. der Inhalt eines IDX-Dateipaars)."""
    inputs: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return int(self.labels.shape[0])


@dataclass
class Dataset:
    """
    Train/Eval-Daten mit Eingaben in [0,1] und Labels in 0..N-1.

    Attributes:
        train_inputs, train_labels: Trainings-Split
        eval_inputs, eval_labels: Evaluations-Split
        num_classes: Anzahl Klassen N
        name: Herkunft (für Logs und Manifest)
    """
    train_inputs: np.ndarray
    train_labels: np.ndarray
    eval_inputs: np.ndarray
    eval_labels: np.ndarray
    num_classes: int
    name: str = 'dataset'

    def __post_init__(self):
        self.train_labels = np.asarray(self.train_labels, dtype=np.int64)
        self.eval_labels = np.asarray(self.eval_labels, dtype=np.int64)
        self.train_inputs = np.asarray(self.train_inputs, dtype=np.float64)
        self.eval_inputs = np.asarray(self.eval_inputs, dtype=np.float64)

    @property
    def input_shape(self) -> Tuple[int, ...]:
        return tuple(self.train_inputs.shape[1:])

    def split(self, name: str) -> Tuple[np.ndarray, np.ndarray]:
        if name == 'train':
            return self.train_inputs, self.train_labels
        if name == 'eval':
            return self.eval_inputs, self.eval_labels
        raise UnknownSplitError(name)

    def validate(self) -> "Dataset":
        """
        Prüft die Dataset-Invarianten.

        Raises:
            DatasetError: bei Werten außerhalb [0,1], fremden Labels oder
                Klassen, die in einem Split fehlen
        """
        for split in SPLITS:
            inputs, labels = self.split(split)
            if inputs.shape[0] != labels.shape[0]:
                raise DatasetError(f"Split '{split}': {inputs.shape[0]} inputs but {labels.shape[0]} labels")
            if inputs.size and (inputs.min() < 0.0 or inputs.max() > 1.0):
                raise DatasetError(f"Split '{split}': inputs outside [0,1]")
            if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
                raise DatasetError(f"Split '{split}': labels outside 0..{self.num_classes - 1}")
            missing = sorted(set(range(self.num_classes)) - set(np.unique(labels).tolist()))
            if missing:
                raise DatasetError(f"Split '{split}': classes {missing} have no samples",
                                   details={'split': split, 'missing_classes': missing})
        return self


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    encoded = np.zeros((labels.shape[0], num_classes))
    encoded[np.arange(labels.shape[0]), labels] = 1.0
    return encoded


def stratified_indices(labels: np.ndarray, per_class_counts: dict, rng: np.random.Generator) -> np.ndarray:
    """Wählt pro Klasse die gewünschte Anzahl Indizes (sortiert zurückgegeben)."""
    chosen = []
    for cls, count in sorted(per_class_counts.items()):
        members = np.flatnonzero(labels == cls)
        if members.size < count:
            raise DatasetError(f"Class {cls} has {members.size} samples, {count} requested")
        chosen.append(rng.permutation(members)[:count])
    return np.sort(np.concatenate(chosen)) if chosen else np.array([], dtype=np.int64)


def proportional_counts(labels: np.ndarray, num_classes: int, total: int) -> dict:
    """
    Verteilt `total` proportional zur Klassenhäufigkeit (Largest-Remainder),
    jede Klasse bekommt mindestens ein Sample.
    """
    freq = np.bincount(labels, minlength=num_classes).astype(np.float64)
    total = min(int(total), int(freq.sum()))
    raw = freq / freq.sum() * total
    counts = np.maximum(np.floor(raw).astype(int), 1)
    remainder = total - counts.sum()
    order = np.argsort(-(raw - np.floor(raw)), kind='stable')
    for cls in order[:max(remainder, 0)]:
        counts[cls] += 1
    counts = np.minimum(counts, freq.astype(int))
    return {cls: int(counts[cls]) for cls in range(num_classes)}


def subsample(samples: SampleSet, num_classes: int, total: Optional[int], rng: np.random.Generator) -> SampleSet:
    """Stratifizierte Teilmenge; total=None behält alle Samples."""
    if total is None or total >= len(samples):
        return samples
    idx = stratified_indices(samples.labels, proportional_counts(samples.labels, num_classes, total), rng)
    return SampleSet(inputs=samples.inputs[idx], labels=samples.labels[idx])
