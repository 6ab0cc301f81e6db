"""
Differenzierbare Operationen

Jede Op berechnet ihren Forward-Wert mit numpy und registriert eine lokale
Rückwärtsregel auf dem aktiven Tape. Unterstützt wird genau das, was die
LeNet-lite und die MLPs brauchen: matmul, add, conv2d (Stride 1, valid),
maxpool2d (2x2), relu, prelu, flatten, softmax, log sowie die elementweisen
Hilfsops für die Loss-Funktionen.

Broadcasting ist bewusst eingeschränkt: der zweite Operand darf entweder die
gleiche Form haben oder den hinteren Dimensionen des ersten entsprechen
(Bias-Zeilen).

Author: DSP Development Team
Version: 1.0.0
"""

from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ...exceptions import GravityException, ShapeMismatchError
from .tensor import Tensor, as_tensor, make_output


def _row_broadcastable(a: Tensor, b: Tensor) -> bool:
    return b.shape == a.shape or (b.ndim < a.ndim and a.shape[a.ndim - b.ndim:] == b.shape)


def _reduce_to(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    return grad.reshape((-1,) + shape).sum(axis=0)


# --- Lineare Algebra ---

def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim not in (1, 2) or b.ndim not in (1, 2) or a.shape[-1] != b.shape[0]:
        raise ShapeMismatchError('matmul', [a.shape, b.shape], "inner dimensions must agree")
    a_data, b_data = a.data, b.data

    def rule(g, needs):
        ga = gb = None
        if a_data.ndim == 2 and b_data.ndim == 2:
            ga = g @ b_data.T if needs[0] else None
            gb = a_data.T @ g if needs[1] else None
        elif a_data.ndim == 2:
            ga = np.outer(g, b_data) if needs[0] else None
            gb = a_data.T @ g if needs[1] else None
        elif b_data.ndim == 2:
            ga = b_data @ g if needs[0] else None
            gb = np.outer(a_data, g) if needs[1] else None
        else:
            ga = g * b_data if needs[0] else None
            gb = g * a_data if needs[1] else None
        return ga, gb

    return make_output('matmul', (a, b), np.asarray(a_data @ b_data), rule)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if not _row_broadcastable(a, b):
        raise ShapeMismatchError('add', [a.shape, b.shape])
    b_shape = b.shape

    def rule(g, needs):
        return (g if needs[0] else None, _reduce_to(g, b_shape) if needs[1] else None)

    return make_output('add', (a, b), a.data + b.data, rule)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if not _row_broadcastable(a, b):
        raise ShapeMismatchError('sub', [a.shape, b.shape])
    b_shape = b.shape

    def rule(g, needs):
        return (g if needs[0] else None, -_reduce_to(g, b_shape) if needs[1] else None)

    return make_output('sub', (a, b), a.data - b.data, rule)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if not _row_broadcastable(a, b):
        raise ShapeMismatchError('mul', [a.shape, b.shape])
    a_data, b_data = a.data, b.data

    def rule(g, needs):
        return (g * b_data if needs[0] else None,
                _reduce_to(g * a_data, b_data.shape) if needs[1] else None)

    return make_output('mul', (a, b), a_data * b_data, rule)


def scale(a, factor: float) -> Tensor:
    a = as_tensor(a)
    return make_output('scale', (a,), a.data * factor, lambda g, needs: (g * factor,))


def square(a) -> Tensor:
    a = as_tensor(a)
    a_data = a.data
    return make_output('square', (a,), a_data * a_data, lambda g, needs: (2.0 * a_data * g,))


def sum_all(a) -> Tensor:
    a = as_tensor(a)
    shape = a.shape
    return make_output('sum', (a,), np.asarray(a.data.sum()),
                       lambda g, needs: (np.full(shape, float(g)),))


def mean_all(a) -> Tensor:
    a = as_tensor(a)
    shape, count = a.shape, a.size
    return make_output('mean', (a,), np.asarray(a.data.mean()),
                       lambda g, needs: (np.full(shape, float(g) / count),))


def sum_rows(a) -> Tensor:
    """Summe über die letzte Achse (pro Sample)."""
    a = as_tensor(a)
    shape = a.shape
    return make_output('sum_rows', (a,), a.data.sum(axis=-1),
                       lambda g, needs: (np.broadcast_to(g[..., None], shape).copy(),))


# --- Aktivierungen ---

def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return make_output('relu', (x,), np.where(mask, x.data, 0.0), lambda g, needs: (g * mask,))


def prelu(x, slope) -> Tensor:
    """PReLU mit einer lernbaren, geteilten Steigung (slope hat Form (1,))."""
    x, slope = as_tensor(x), as_tensor(slope)
    if slope.size != 1:
        raise ShapeMismatchError('prelu', [x.shape, slope.shape], "slope must hold a single value")
    mask = x.data > 0
    a = float(slope.data.reshape(-1)[0])
    x_data = x.data

    def rule(g, needs):
        gx = g * np.where(mask, 1.0, a) if needs[0] else None
        ga = np.full(slope.shape, float((g * np.where(mask, 0.0, x_data)).sum())) if needs[1] else None
        return gx, ga

    return make_output('prelu', (x, slope), np.where(mask, x_data, a * x_data), rule)


def softmax(x) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=-1, keepdims=True)

    def rule(g, needs):
        return (probs * (g - (g * probs).sum(axis=-1, keepdims=True)),)

    return make_output('softmax', (x,), probs, rule)


def log(x) -> Tensor:
    x = as_tensor(x)
    x_data = x.data
    with np.errstate(divide='ignore'):
        out = np.log(x_data)
    return make_output('log', (x,), out, lambda g, needs: (g / x_data,))


def clamp_min(x, lower: float) -> Tensor:
    x = as_tensor(x)
    mask = x.data >= lower
    return make_output('clamp_min', (x,), np.maximum(x.data, lower), lambda g, needs: (g * mask,))


# --- Form ---

def flatten(x) -> Tensor:
    x = as_tensor(x)
    if x.ndim < 2:
        raise ShapeMismatchError('flatten', [x.shape], "expected a batch dimension")
    shape = x.shape
    return make_output('flatten', (x,), x.data.reshape(shape[0], -1),
                       lambda g, needs: (g.reshape(shape),))


# --- Faltung und Pooling ---

def conv2d(x, weight, bias=None) -> Tensor:
    """
    2D-Faltung mit Stride 1 und valid Padding.

    Args:
        x: (B, C, H, W)
        weight: (O, C, kh, kw)
        bias: (O,) oder None
    """
    x, weight = as_tensor(x), as_tensor(weight)
    if x.ndim != 4 or weight.ndim != 4 or x.shape[1] != weight.shape[1]:
        raise ShapeMismatchError('conv2d', [x.shape, weight.shape], "expected (B,C,H,W) and (O,C,kh,kw)")
    kh, kw = weight.shape[2], weight.shape[3]
    if x.shape[2] < kh or x.shape[3] < kw:
        raise ShapeMismatchError('conv2d', [x.shape, weight.shape], "kernel larger than input")
    inputs = [x, weight]
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (weight.shape[0],):
            raise ShapeMismatchError('conv2d', [weight.shape, bias.shape], "bias must match output channels")
        inputs.append(bias)

    x_data, w_data = x.data, weight.data
    windows = sliding_window_view(x_data, (kh, kw), axis=(2, 3))
    out = np.einsum('bchwij,ocij->bohw', windows, w_data, optimize=True)
    if bias is not None:
        out = out + bias.data[None, :, None, None]
    out_h, out_w = out.shape[2], out.shape[3]

    def rule(g, needs):
        gx = gw = gb = None
        if needs[0]:
            gx = np.zeros_like(x_data)
            for i in range(kh):
                for j in range(kw):
                    gx[:, :, i:i + out_h, j:j + out_w] += np.einsum('bohw,oc->bchw', g, w_data[:, :, i, j], optimize=True)
        if needs[1]:
            gw = np.einsum('bohw,bchwij->ocij', g, windows, optimize=True)
        if len(needs) > 2 and needs[2]:
            gb = g.sum(axis=(0, 2, 3))
        return (gx, gw, gb)[:len(needs)]

    return make_output('conv2d', inputs, out, rule)


def maxpool2d(x) -> Tensor:
    """2x2 Max-Pooling mit Stride 2; ungerade Ränder werden verworfen."""
    x = as_tensor(x)
    if x.ndim != 4 or x.shape[2] < 2 or x.shape[3] < 2:
        raise ShapeMismatchError('maxpool2d', [x.shape], "expected (B,C,H,W) with H,W >= 2")
    b, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    blocks = (x.data[:, :, :h2 * 2, :w2 * 2]
              .reshape(b, c, h2, 2, w2, 2)
              .transpose(0, 1, 2, 4, 3, 5)
              .reshape(b, c, h2, w2, 4))
    idx = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]

    def rule(g, needs):
        routed = np.zeros_like(blocks)
        np.put_along_axis(routed, idx[..., None], g[..., None], axis=-1)
        gx = np.zeros((b, c, h, w))
        gx[:, :, :h2 * 2, :w2 * 2] = (routed.reshape(b, c, h2, w2, 2, 2)
                                      .transpose(0, 1, 2, 4, 3, 5)
                                      .reshape(b, c, h2 * 2, w2 * 2))
        return (gx,)

    return make_output('maxpool2d', (x,), out, rule)


OP_REGISTRY: Dict[str, Callable[..., Tensor]] = {
    'matmul': matmul,
    'add': add,
    'sub': sub,
    'mul': mul,
    'conv2d': conv2d,
    'maxpool2d': maxpool2d,
    'relu': relu,
    'prelu': prelu,
    'flatten': flatten,
    'softmax': softmax,
    'log': log,
    'square': square,
    'sum': sum_all,
    'mean': mean_all,
}


def forward_op(op_kind: str, inputs: Sequence, **params) -> Tensor:
    """
    Generischer Einstiegspunkt: führt die Op `op_kind` auf `inputs` aus.

    Usage:
        forward_op('relu', [x])
        forward_op('conv2d', [x, weight, bias])
    """
    try:
        op = OP_REGISTRY[op_kind]
    except KeyError:
        raise GravityException(f"Unknown op kind '{op_kind}'", details={'supported': sorted(OP_REGISTRY)})
    return op(*inputs, **params)
