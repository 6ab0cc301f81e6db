"""
ICC- und ICD-Metriken

ICC: Summe der Klassen-"Massen" ε_i. Standard (mean_distance): mittlerer
L2-Abstand der Samples zum Centroid. Alternative (spread_norm): ||σ_i||₂.

ICD: über alle ungeordneten Paare i<j der Centroid-Abstände
    min(d_ij), 1/N * Σ d_ij, max(d_ij)

Author: DSP Development Team
Version: 1.0.0
"""

from itertools import combinations
from typing import List

from ...exceptions import GravityException
from ..geometry.masses import ClassMass, pairwise_distances
from .records import ICDTriple

ICC_MODES = ('mean_distance', 'spread_norm')


def compute_icc(masses: List[ClassMass], mode: str = 'mean_distance') -> float:
    if not masses:
        raise GravityException("compute_icc needs at least one class", error_code='TOO_FEW_CLASSES')
    if mode == 'mean_distance':
        return float(sum(m.mean_radius for m in masses))
    if mode == 'spread_norm':
        return float(sum(m.mass for m in masses))
    raise GravityException(f"Unknown icc_mode '{mode}'", error_code='UNKNOWN_ICC_MODE',
                           details={'allowed': list(ICC_MODES)})


def compute_icd(masses: List[ClassMass]) -> ICDTriple:
    n = len(masses)
    if n < 2:
        raise GravityException("compute_icd needs at least two classes", error_code='TOO_FEW_CLASSES')
    distances = pairwise_distances(masses)
    pairs = [float(distances[i, j]) for i, j in combinations(range(n), 2)]
    return ICDTriple(min=min(pairs), avg=sum(pairs) / n, max=max(pairs))
