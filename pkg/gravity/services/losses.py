"""
Loss-Funktionen des Gravity-Trainings

- cross_entropy_loss: Mittel über den Batch von -Σ Y log softmax(logits)
- latent_alignment_loss: MSE jedes Latent-Vektors zum Ziel-Centroid seiner Klasse
- gravity_loss: (1-γ) * CE + γ * (L_head + L_tail)

Die Funktionen arbeiten auf Autodiff-Tensoren und sind end-to-end
differenzierbar. Sie werden sowohl vom Training als auch von den Angriffen
(Eingabe-Gradient) verwendet.

Author: DSP Development Team
Version: 1.0.0
"""

from typing import Dict

import numpy as np

from ..exceptions import GravityException, ShapeMismatchError, UnknownLabelError
from .autodiff import ops
from .autodiff.tensor import Tensor, as_tensor

LOG_CLAMP = 1e-12


def cross_entropy_loss(logits: Tensor, Y) -> Tensor:
    """
    Args:
        logits: (B, N)
        Y: One-hot-Labels (B, N)
    """
    logits = as_tensor(logits)
    targets = np.asarray(getattr(Y, 'data', Y), dtype=np.float64)
    if logits.ndim != 2 or targets.shape != logits.shape:
        raise ShapeMismatchError('cross_entropy_loss', [logits.shape, targets.shape],
                                 "logits and one-hot labels must both be (B, N)")
    log_probs = ops.log(ops.clamp_min(ops.softmax(logits), LOG_CLAMP))
    per_batch = ops.sum_all(ops.mul(log_probs, Tensor(targets)))
    return ops.scale(per_batch, -1.0 / logits.shape[0])


def latent_alignment_loss(latents: Tensor, labels, target_centroids) -> Tensor:
    """
    (1 / (B*n)) Σ_f ||c_label(f) - latent_f||²

    Raises:
        UnknownLabelError: Label ohne Ziel-Centroid
        ShapeMismatchError: Latent- und Centroid-Dimension passen nicht
    """
    latents = as_tensor(latents)
    labels = np.asarray(labels, dtype=np.int64)
    centroids = np.asarray(getattr(target_centroids, 'data', target_centroids), dtype=np.float64)
    if centroids.ndim == 1:
        centroids = centroids[:, None]
    unknown = labels[(labels < 0) | (labels >= centroids.shape[0])]
    if unknown.size:
        raise UnknownLabelError(unknown.tolist(), centroids.shape[0])
    if latents.ndim != 2 or latents.shape[1] != centroids.shape[1] or latents.shape[0] != labels.shape[0]:
        raise ShapeMismatchError('latent_alignment_loss', [latents.shape, centroids.shape, labels.shape],
                                 "latents must be (B, n) with one label per row and n == centroid dim")
    targets = Tensor(centroids[labels])
    return ops.mean_all(ops.square(ops.sub(latents, targets)))


def gravity_loss(logits: Tensor, Y, tail_latents: Tensor, head_latents: Tensor,
                 targets: Dict[str, np.ndarray], gamma: float) -> Tensor:
    """
    Kombinierter Loss: Genauigkeit (CE) gegen Sicherheit (Latent-Ausrichtung).

    Args:
        targets: verschobene Centroids {'head': (N, n_head), 'tail': (N, n_tail)}
        gamma: γ in [0,1], Accuracy des Teachers
    """
    if not 0.0 <= gamma <= 1.0:
        raise GravityException(f"gamma must be in [0,1], got {gamma}", error_code='INVALID_GAMMA')
    labels = np.argmax(np.asarray(getattr(Y, 'data', Y)), axis=1)
    ce = cross_entropy_loss(logits, Y)
    alignment = ops.add(
        latent_alignment_loss(head_latents, labels, targets['head']),
        latent_alignment_loss(tail_latents, labels, targets['tail']),
    )
    return ops.add(ops.scale(ce, 1.0 - gamma), ops.scale(alignment, gamma))
