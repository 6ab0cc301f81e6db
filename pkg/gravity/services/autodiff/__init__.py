"""
Autodiff Services Package

Reverse-Mode Automatic Differentiation über dichte float64-Tensoren:
- Tensor / ComputationTape / backward
- Ops (matmul, conv2d, maxpool2d, relu, prelu, softmax, ...)
- AdamOptimizer
- Gradient-Check und AGRV-Checkpoint-Codec

Author: DSP Development Team
Version: 1.0.0
"""

from .tensor import (
    Tensor,
    ComputationTape,
    TapeNode,
    as_tensor,
    backward,
    current_tape,
    no_grad,
    recording,
)
from .ops import forward_op, OP_REGISTRY
from .optim import AdamOptimizer, sgd_adam_step
from .gradcheck import gradient_check, GradientCheckResult
from .checkpoint import save_parameters, load_parameters

__all__ = [
    'Tensor',
    'ComputationTape',
    'TapeNode',
    'as_tensor',
    'backward',
    'current_tape',
    'no_grad',
    'recording',
    'forward_op',
    'OP_REGISTRY',
    'AdamOptimizer',
    'sgd_adam_step',
    'gradient_check',
    'GradientCheckResult',
    'save_parameters',
    'load_parameters',
]
