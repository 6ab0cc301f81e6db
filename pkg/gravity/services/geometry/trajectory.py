"""
Export der Centroid-Trajektorien als CSV

Spalten: iteration, layer, class_id, x0, x1, ...
Mit projection='pca2' werden die Centroids aller Iterationen eines Layers
gemeinsam auf die ersten beiden Hauptkomponenten (sklearn PCA) projiziert.
Die verwendete Projektion steht als Kommentarzeile im Dateikopf.

Author: DSP Development Team
Version: 1.0.0
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np
from sklearn.decomposition import PCA

from ...exceptions import GravityException

logger = logging.getLogger(__name__)

PROJECTIONS = ('none', 'pca2')


@dataclass
class CentroidSnapshot:
    iteration: int
    layer: str
    centroids: np.ndarray


@dataclass
class Projection:
    """PCA-Projektion eines Layers (Mittelwert und Hauptachsen)."""
    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray

    def apply(self, points: np.ndarray) -> np.ndarray:
        return (points - self.mean) @ self.components.T


def fit_pca2(points: np.ndarray) -> Projection:
    """
    Passt sklearn-PCA auf die Punktwolke an. Bei weniger als zwei Achsen
    (Dimension oder Punktzahl) wird mit Null-Achsen aufgefüllt; die
    Vorzeichen sind so fixiert, dass der betragsgrößte Eintrag jeder Achse
    positiv ist.
    """
    points = np.asarray(points, dtype=np.float64)
    components = np.zeros((2, points.shape[1]))
    ratio = np.zeros(2)
    rows = min(2, points.shape[0] - 1, points.shape[1])
    if rows < 1:
        return Projection(mean=points.mean(axis=0), components=components, explained_variance_ratio=ratio)

    pca = PCA(n_components=rows, svd_solver='full').fit(points)
    components[:rows] = pca.components_
    for row in components:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0
    # Punktwolke ohne Streuung: sklearn liefert hier NaN
    ratio[:rows] = np.nan_to_num(pca.explained_variance_ratio_, nan=0.0)
    return Projection(mean=pca.mean_, components=components, explained_variance_ratio=ratio)


def project_snapshots(snapshots: List[CentroidSnapshot]) -> Tuple[List[CentroidSnapshot], Dict[str, Projection]]:
    by_layer: Dict[str, List[CentroidSnapshot]] = {}
    for snap in snapshots:
        by_layer.setdefault(snap.layer, []).append(snap)
    projections = {
        layer: fit_pca2(np.concatenate([s.centroids for s in snaps]))
        for layer, snaps in sorted(by_layer.items())
    }
    projected = [
        CentroidSnapshot(s.iteration, s.layer, projections[s.layer].apply(s.centroids))
        for s in snapshots
    ]
    return projected, projections


def export_trajectories(path: Union[str, Path], snapshots: Iterable[CentroidSnapshot],
                        projection: str = 'none') -> Path:
    """
    Schreibt die Trajektorien nach `path`.

    Args:
        snapshots: ein Eintrag pro (Iteration, Layer)
        projection: 'none' (Rohkoordinaten) oder 'pca2'
    """
    if projection not in PROJECTIONS:
        raise GravityException(f"Unknown projection '{projection}'", error_code='UNKNOWN_PROJECTION',
                               details={'allowed': list(PROJECTIONS)})
    snapshots = sorted(snapshots, key=lambda s: (s.iteration, s.layer))
    header_comment = ['# projection: none']
    if projection == 'pca2' and snapshots:
        snapshots, projections = project_snapshots(snapshots)
        header_comment = [
            f"# projection: pca2 layer={layer} explained_variance_ratio="
            f"{proj.explained_variance_ratio[0]:.6f},{proj.explained_variance_ratio[1]:.6f}"
            for layer, proj in projections.items()
        ]

    width = max((s.centroids.shape[1] for s in snapshots), default=0)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as handle:
        for line in header_comment:
            handle.write(line + '\n')
        writer = csv.writer(handle)
        writer.writerow(['iteration', 'layer', 'class_id'] + [f'x{i}' for i in range(width)])
        for snap in snapshots:
            for class_id, centroid in enumerate(snap.centroids):
                writer.writerow([snap.iteration, snap.layer, class_id] + [repr(float(v)) for v in centroid])
    logger.info(f"Centroid-Trajektorien ({projection}) nach {path} geschrieben")
    return path


def read_trajectories(path: Union[str, Path]) -> List[dict]:
    """Liest eine Trajektorien-CSV (Kommentarzeilen werden übersprungen)."""
    with Path(path).open() as handle:
        rows = csv.DictReader(line for line in handle if not line.startswith('#'))
        return [
            {
                'iteration': int(row['iteration']),
                'layer': row['layer'],
                'class_id': int(row['class_id']),
                'coords': [float(v) for k, v in row.items() if k.startswith('x') and v != ''],
            }
            for row in rows
        ]
