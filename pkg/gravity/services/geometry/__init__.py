"""
Geometry Services Package

Latent-Space-Statistiken und das Anti-Gravity-Kraftsystem:
- ClassMass / extract_centroids / pairwise_distances
- anti_gravity_pair / total_force / relocate_centroids
- Export der Centroid-Trajektorien (CSV, optional PCA-2)

Author: DSP Development Team
Version: 1.0.0
"""

from .masses import ClassMass, extract_centroids, pairwise_distances, centroid_matrix
from .forces import (
    ForceField,
    anti_gravity_pair,
    total_force,
    relocate_centroids,
    relocate,
    D_FLOOR,
    MASS_MODES,
)
from .trajectory import CentroidSnapshot, export_trajectories, read_trajectories, fit_pca2

__all__ = [
    'ClassMass',
    'extract_centroids',
    'pairwise_distances',
    'centroid_matrix',
    'ForceField',
    'anti_gravity_pair',
    'total_force',
    'relocate_centroids',
    'relocate',
    'D_FLOOR',
    'MASS_MODES',
    'CentroidSnapshot',
    'export_trajectories',
    'read_trajectories',
    'fit_pca2',
]
