"""
Synthetische Gaussian Blobs als Desk-Scale-Ersatzdatensatz.

Author: DSP Development Team
Version: 1.0.0
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from sklearn.datasets import make_blobs as sample_gaussian_blobs

from ...exceptions import DatasetError
from ..seeding import SeedStreams
from .dataset import Dataset

logger = logging.getLogger(__name__)


@dataclass
class BlobSpec:
    """
    Beschreibung eines Blob-Datensatzes.

    Attributes:
        means: Mittelwert-Vektor pro Klasse (N x dim)
        std: isotrope Standardabweichung (Skalar oder pro Klasse)
        samples_per_class: Samples pro Klasse, vor dem Train/Eval-Split
        seed: Seed für das Sampling
        eval_fraction: Anteil pro Klasse, der in den Eval-Split geht
        bounds: Wertebereich (lo, hi), der affin auf [0,1] abgebildet wird
    """
    means: List[List[float]]
    std: object = 0.1
    samples_per_class: int = 500
    seed: int = 0
    eval_fraction: float = 0.2
    bounds: Tuple[float, float] = (0.0, 1.0)

    @property
    def num_classes(self) -> int:
        return len(self.means)

    @property
    def dim(self) -> int:
        return len(self.means[0]) if self.means else 0

    def stds(self) -> np.ndarray:
        stds = np.broadcast_to(np.asarray(self.std, dtype=np.float64), (self.num_classes,))
        return np.array(stds)

    def validate(self) -> "BlobSpec":
        if self.num_classes < 2:
            raise DatasetError("BlobSpec needs at least 2 classes")
        means = np.asarray(self.means, dtype=np.float64)
        if means.ndim != 2 or means.shape[1] < 1:
            raise DatasetError(f"BlobSpec means must be a non-empty N x dim list, got shape {means.shape}")
        if np.any(self.stds() <= 0):
            raise DatasetError("BlobSpec std must be > 0")
        if len({tuple(m) for m in means.tolist()}) != self.num_classes:
            raise DatasetError("BlobSpec means must be distinct")
        if self.samples_per_class < 2:
            raise DatasetError("BlobSpec needs at least 2 samples per class")
        if not 0.0 < self.eval_fraction < 1.0:
            raise DatasetError(f"eval_fraction must be in (0,1), got {self.eval_fraction}")
        lo, hi = self.bounds
        if not hi > lo:
            raise DatasetError(f"bounds must satisfy hi > lo, got {self.bounds}")
        return self


def make_blobs(spec: BlobSpec) -> Dataset:
    """
    Zieht isotrope Gauss-Samples je Klasse mit sklearn.datasets.make_blobs,
    bildet `bounds` affin auf [0,1] ab und klemmt pro Dimension auf [0,1].

    Pro Klasse gehen die ersten round(eval_fraction * M) Samples in den
    Eval-Split, so dass jede Klasse in beiden Splits vorkommt.
    """
    spec.validate()
    random_state = int(SeedStreams(spec.seed).rng('blobs').integers(2 ** 32 - 1))
    lo, hi = spec.bounds
    n_eval = min(max(int(round(spec.eval_fraction * spec.samples_per_class)), 1), spec.samples_per_class - 1)

    # shuffle=False: die Samples liegen klassenweise in Blöcken
    samples, labels = sample_gaussian_blobs(
        n_samples=[spec.samples_per_class] * spec.num_classes,
        n_features=spec.dim,
        centers=np.asarray(spec.means, dtype=np.float64),
        cluster_std=spec.stds(),
        shuffle=False,
        random_state=random_state,
    )
    samples = np.clip((samples - lo) / (hi - lo), 0.0, 1.0)
    labels = labels.astype(np.int64)

    train_x, train_y, eval_x, eval_y = [], [], [], []
    for cls in range(spec.num_classes):
        block = slice(cls * spec.samples_per_class, (cls + 1) * spec.samples_per_class)
        class_x, class_y = samples[block], labels[block]
        eval_x.append(class_x[:n_eval])
        eval_y.append(class_y[:n_eval])
        train_x.append(class_x[n_eval:])
        train_y.append(class_y[n_eval:])

    dataset = Dataset(
        train_inputs=np.concatenate(train_x),
        train_labels=np.concatenate(train_y),
        eval_inputs=np.concatenate(eval_x),
        eval_labels=np.concatenate(eval_y),
        num_classes=spec.num_classes,
        name='blobs',
    )
    logger.info(
        f"Blobs erzeugt: {spec.num_classes} Klassen, dim={spec.dim}, "
        f"{dataset.train_labels.size} Train / {dataset.eval_labels.size} Eval"
    )
    return dataset.validate()


def two_blob_spec(samples_per_class: int = 500, seed: int = 0, std: float = 0.1) -> BlobSpec:
    """Zwei Klassen in 2-D, symmetrisch um die Mitte des Einheitsquadrats."""
    return BlobSpec(means=[[0.3, 0.3], [0.7, 0.7]], std=std, samples_per_class=samples_per_class, seed=seed)
