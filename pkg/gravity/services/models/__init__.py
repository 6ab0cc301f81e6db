"""
Model Services Package

Klassifikator-Definitionen mit expliziten Head- und Tail-Layern:
- ModelSpec / LayerSpec / LayerTag
- Model mit forward_with_latents, clone, save/load
- Builder für LeNet-lite und MLPs

Author: DSP Development Team
Version: 1.0.0
"""

from .spec import ModelSpec, LayerSpec, LayerTag
from .networks import (
    Model,
    LatentOutput,
    build_model,
    build_lenet_lite,
    build_mlp,
    build_mlp_blobs,
    lenet_lite_spec,
    mlp_spec,
    forward_with_latents,
    spec_path_for,
)

__all__ = [
    'ModelSpec',
    'LayerSpec',
    'LayerTag',
    'Model',
    'LatentOutput',
    'build_model',
    'build_lenet_lite',
    'build_mlp',
    'build_mlp_blobs',
    'lenet_lite_spec',
    'mlp_spec',
    'forward_with_latents',
    'spec_path_for',
]
