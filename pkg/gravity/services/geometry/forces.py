"""
Anti-Gravity-Kräfte und Centroid-Verschiebung

Kraft zwischen zwei Klassen (Abstoßung, zeigt von c_j nach c_i):
    F_ij = m_i * m_j / max(d_ij², d_floor²) * (c_i - c_j)
Gesamtkraft:
    F_i = Σ_{j≠i} F_ij
Verschiebung:
    F_M = max_i ||F_i||,  α_i = G * F_i / F_M,  c_i' = c_i + α_i

Mit mass_mode='elementwise' wird statt m_i * m_j das elementweise Produkt
σ_i ⊙ σ_j verwendet.

Author: DSP Development Team
Version: 1.0.0
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ...exceptions import AllZeroForcesError, GravityException
from .masses import ClassMass, centroid_matrix

logger = logging.getLogger(__name__)

D_FLOOR = 1e-6
MASS_MODES = ('norm', 'elementwise')


@dataclass
class ForceField:
    """Gesamtkräfte pro Klasse plus (nach relocate_centroids) die Schritte α."""
    forces: np.ndarray
    steps: Optional[np.ndarray] = None
    G: Optional[float] = None
    max_force: float = 0.0

    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.forces, axis=1)


def _check_mass_mode(mass_mode: str) -> None:
    if mass_mode not in MASS_MODES:
        raise GravityException(f"Unknown mass_mode '{mass_mode}'", error_code='UNKNOWN_MASS_MODE',
                               details={'allowed': list(MASS_MODES)})


def _pair_coefficient(mass_i: ClassMass, mass_j: ClassMass, mass_mode: str):
    _check_mass_mode(mass_mode)
    if mass_mode == 'elementwise':
        return mass_i.spread * mass_j.spread
    return mass_i.mass * mass_j.mass


def anti_gravity_pair(mass_i: ClassMass, mass_j: ClassMass, mass_mode: str = 'norm') -> np.ndarray:
    """Abstoßende Kraft, die Klasse j auf Klasse i ausübt."""
    displacement = mass_i.centroid - mass_j.centroid
    d_squared = float(np.dot(displacement, displacement))
    coefficient = _pair_coefficient(mass_i, mass_j, mass_mode)
    return coefficient / max(d_squared, D_FLOOR ** 2) * displacement


def total_force(masses: List[ClassMass], mass_mode: str = 'norm') -> ForceField:
    """
    Summiert alle paarweisen Kräfte pro Klasse (vektorisiert).

    Returns:
        ForceField mit forces (N x d); steps bleiben leer
    """
    if len(masses) < 2:
        raise GravityException("total_force needs at least 2 classes", error_code='TOO_FEW_CLASSES')
    _check_mass_mode(mass_mode)
    centroids = centroid_matrix(masses)
    displacement = centroids[:, None, :] - centroids[None, :, :]
    d_squared = np.maximum(np.sum(displacement ** 2, axis=-1), D_FLOOR ** 2)
    if mass_mode == 'norm':
        m = np.array([cm.mass for cm in masses])
        coefficient = (np.outer(m, m) / d_squared)[:, :, None]
    else:
        spreads = np.stack([cm.spread for cm in masses])
        coefficient = spreads[:, None, :] * spreads[None, :, :] / d_squared[:, :, None]
    # Diagonale trägt nichts bei: displacement ist dort 0
    forces = np.sum(coefficient * displacement, axis=1)
    return ForceField(forces=forces, max_force=float(np.max(np.linalg.norm(forces, axis=1))))


def relocate_centroids(field: ForceField, masses: List[ClassMass], G: float) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Verschiebt jeden Centroid um α_i = G * F_i / F_M.

    Der Klasse mit der größten Kraft wird exakt um G verschoben, alle
    anderen proportional weniger.

    Returns:
        (neue Centroids, α-Matrix); field.steps und field.G werden gesetzt

    Raises:
        AllZeroForcesError: wenn alle Kräfte 0 sind
    """
    magnitudes = field.magnitudes()
    max_force = float(np.max(magnitudes)) if magnitudes.size else 0.0
    if max_force <= 0.0:
        raise AllZeroForcesError()
    steps = (G * field.forces) / max_force
    field.steps = steps
    field.G = float(G)
    field.max_force = max_force
    relocated = [cm.centroid + steps[i] for i, cm in enumerate(masses)]
    logger.debug(f"Centroids verschoben: F_M={max_force:.6g}, G={G}")
    return relocated, steps


def relocate(masses: List[ClassMass], G: float, mass_mode: str = 'norm') -> Tuple[List[np.ndarray], ForceField]:
    """Kräfte berechnen und Centroids in einem Schritt verschieben."""
    force_field = total_force(masses, mass_mode=mass_mode)
    relocated, _ = relocate_centroids(force_field, masses, G)
    return relocated, force_field
