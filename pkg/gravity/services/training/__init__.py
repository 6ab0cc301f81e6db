"""
Training Services Package

Baseline- und Gravity-Training:
- Losses (Cross-Entropy, Latent-Alignment, Gravity-Loss)
- ModelTrainer, adversarial_augment, evaluate_accuracy
- GravityConfig / GravityState / gravity_iteration / run_gravity

Author: DSP Development Team
Version: 1.0.0
"""

from ..losses import cross_entropy_loss, latent_alignment_loss, gravity_loss
from .trainer import (
    TrainingConfig,
    TrainingResult,
    ModelTrainer,
    adversarial_augment,
    evaluate_accuracy,
    train_baseline,
)
from .gravity import (
    GravityConfig,
    GravityState,
    GravityRun,
    LayerStats,
    collect_latents,
    layer_statistics,
    relocate_layer,
    initial_state,
    gravity_iteration,
    run_gravity,
    checkpoint_path_for,
    save_checkpoint,
    RECORDS_FILENAME,
)

__all__ = [
    'cross_entropy_loss',
    'latent_alignment_loss',
    'gravity_loss',
    'TrainingConfig',
    'TrainingResult',
    'ModelTrainer',
    'adversarial_augment',
    'evaluate_accuracy',
    'train_baseline',
    'GravityConfig',
    'GravityState',
    'GravityRun',
    'LayerStats',
    'collect_latents',
    'layer_statistics',
    'relocate_layer',
    'initial_state',
    'gravity_iteration',
    'run_gravity',
    'checkpoint_path_for',
    'save_checkpoint',
    'RECORDS_FILENAME',
]
