"""
Klassen-Statistiken im Latent Space

Für jede Klasse werden aus den latenten Features berechnet:
- Centroid c_i (Mittelwert der Klassen-Samples)
- Spread σ_i (Populations-Standardabweichung pro Dimension)
- Masse m_i = ||σ_i||₂
- mittlerer Abstand der Samples zum Centroid (für ICC)

Author: DSP Development Team
Version: 1.0.0
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from ...exceptions import EmptyClassError, ShapeMismatchError, UnknownLabelError

logger = logging.getLogger(__name__)


@dataclass
class ClassMass:
    """Latente Zusammenfassung einer Klasse."""
    class_id: int
    centroid: np.ndarray
    spread: np.ndarray
    mass: float
    cardinality: int
    mean_radius: float = 0.0

    def to_dict(self) -> dict:
        return {
            'class_id': self.class_id,
            'centroid': self.centroid.tolist(),
            'spread': self.spread.tolist(),
            'mass': float(self.mass),
            'cardinality': int(self.cardinality),
            'mean_radius': float(self.mean_radius),
        }


def extract_centroids(latents, labels, num_classes: int = None) -> List[ClassMass]:
    """
    Extrahiert Centroid, Spread und Masse pro Klasse.

    Args:
        latents: (n, d) Array (oder Tensor) mit einem Vektor pro Sample
        labels: (n,) Klassen-Labels
        num_classes: N; Standard ist max(label) + 1

    Raises:
        EmptyClassError: wenn eine Klasse 0..N-1 keine Samples hat
        UnknownLabelError: für Labels ausserhalb von 0..N-1
    """
    values = np.asarray(getattr(latents, 'data', latents), dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2 or values.shape[0] != labels.shape[0]:
        raise ShapeMismatchError('extract_centroids', [values.shape, labels.shape],
                                 "latents must be (n, d) with one label per row")
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if labels.size else 0

    out_of_range = labels[(labels < 0) | (labels >= num_classes)]
    if out_of_range.size:
        raise UnknownLabelError(out_of_range, num_classes)

    counts = np.bincount(labels, minlength=num_classes)
    missing = [int(c) for c in np.flatnonzero(counts == 0)]
    if missing:
        raise EmptyClassError(missing)

    masses = []
    for cls in range(num_classes):
        members = values[labels == cls]
        centroid = members.mean(axis=0)
        offsets = members - centroid
        spread = np.sqrt(np.mean(offsets ** 2, axis=0))
        masses.append(ClassMass(
            class_id=cls,
            centroid=centroid,
            spread=spread,
            mass=float(np.linalg.norm(spread)),
            cardinality=int(members.shape[0]),
            mean_radius=float(np.mean(np.linalg.norm(offsets, axis=1))),
        ))
    return masses


def centroid_matrix(masses: List[ClassMass]) -> np.ndarray:
    return np.stack([m.centroid for m in masses])


def pairwise_distances(masses: List[ClassMass]) -> np.ndarray:
    """Symmetrische N x N Matrix der euklidischen Centroid-Abstände."""
    centroids = centroid_matrix(masses)
    diff = centroids[:, None, :] - centroids[None, :, :]
    distances = np.sqrt(np.sum(diff ** 2, axis=-1))
    np.fill_diagonal(distances, 0.0)
    return distances
