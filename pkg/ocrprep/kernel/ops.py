"""
Differentiable primitives

Each primitive computes its value with numpy and, when a tape is active,
records a closure that maps the output gradient to input gradients.

Primitive set:
    element-wise: add, sub, mul, sigmoid, relu, tanh
    linear:       matmul, conv2d, upsample_nearest
    normalizing:  batch_norm, log_softmax
    structural:   reshape, transpose, getitem, concat, stack
    reductions:   sum, mean, mse
    recurrent:    gru_cell (composed from the primitives above)
"""

from __future__ import annotations

from typing import Any, Optional, Sequence, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit, logsumexp

from ..errors import ShapeError
from .tensor import Tensor, as_tensor, emit

IntPair = Union[int, tuple[int, int]]


def _pair(a: Any, b: Any) -> tuple[Tensor, Tensor]:
    if isinstance(a, Tensor) and not isinstance(b, Tensor):
        return a, as_tensor(b, dtype=a.dtype)
    if isinstance(b, Tensor) and not isinstance(a, Tensor):
        return as_tensor(a, dtype=b.dtype), b
    return as_tensor(a), as_tensor(b)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_check(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


def _as_pair(value: IntPair) -> tuple[int, int]:
    if isinstance(value, int):
        return value, value
    return int(value[0]), int(value[1])


# ============================================================================
# Element-wise
# ============================================================================

def add(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_check("add", a, b)

    def grad_fn(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return emit("add", (a, b), a.data + b.data, grad_fn)


def sub(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_check("sub", a, b)

    def grad_fn(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return emit("sub", (a, b), a.data - b.data, grad_fn)


def mul(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_check("mul", a, b)

    def grad_fn(g: np.ndarray):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return emit("mul", (a, b), a.data * b.data, grad_fn)


def sigmoid(x: Tensor) -> Tensor:
    y = expit(x.data)

    def grad_fn(g: np.ndarray):
        return (g * y * (1.0 - y),)

    return emit("sigmoid", (x,), y, grad_fn)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def grad_fn(g: np.ndarray):
        return (g * mask,)

    return emit("relu", (x,), x.data * mask, grad_fn)


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)

    def grad_fn(g: np.ndarray):
        return (g * (1.0 - y * y),)

    return emit("tanh", (x,), y, grad_fn)


# ============================================================================
# Linear maps
# ============================================================================

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """2-D matrix product"""
    a, b = _pair(a, b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def grad_fn(g: np.ndarray):
        return g @ b.data.T, a.data.T @ g

    return emit("matmul", (a, b), a.data @ b.data, grad_fn)


def conv2d(
    x: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
    stride: IntPair = 1,
    padding: IntPair = 0,
) -> Tensor:
    """
    2-D cross-correlation.

    Args:
        x: input of shape (N, C, H, W)
        weight: kernel of shape (O, C, kh, kw)
        bias: optional (O,)
        stride: step along (H, W)
        padding: zero padding along (H, W)

    Returns:
        Tensor of shape (N, O, Ho, Wo)
    """
    if x.ndim != 4 or weight.ndim != 4 or x.shape[1] != weight.shape[1]:
        raise ShapeError(f"conv2d: incompatible shapes {x.shape} and {weight.shape}")
    if bias is not None and bias.shape != (weight.shape[0],):
        raise ShapeError(f"conv2d: incompatible shapes {weight.shape} and {bias.shape}")

    sh, sw = _as_pair(stride)
    ph, pw = _as_pair(padding)
    n, c, h, w = x.shape
    kh, kw = weight.shape[2], weight.shape[3]
    hp, wp = h + 2 * ph, w + 2 * pw
    if hp < kh or wp < kw:
        raise ShapeError(f"conv2d: incompatible shapes {x.shape} and {weight.shape}")

    xp = np.pad(x.data, ((0, 0), (0, 0), (ph, ph), (pw, pw))) if (ph or pw) else x.data
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    ho, wo = windows.shape[2], windows.shape[3]

    out = np.tensordot(windows, weight.data, axes=([1, 4, 5], [1, 2, 3]))
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2))
    if bias is not None:
        out = out + bias.data[None, :, None, None]

    def grad_fn(g: np.ndarray):
        g_weight = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
        cols = np.tensordot(g, weight.data, axes=([1], [0]))  # (N, Ho, Wo, C, kh, kw)
        g_xp = np.zeros((n, c, hp, wp), dtype=x.dtype)
        for i in range(kh):
            for j in range(kw):
                g_xp[:, :, i:i + sh * (ho - 1) + 1:sh, j:j + sw * (wo - 1) + 1:sw] += (
                    cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                )
        g_x = g_xp[:, :, ph:ph + h, pw:pw + w]
        if bias is None:
            return g_x, g_weight
        return g_x, g_weight, g.sum(axis=(0, 2, 3))

    inputs = (x, weight) if bias is None else (x, weight, bias)
    return emit("conv2d", inputs, out, grad_fn)


def upsample_nearest(x: Tensor, factor: int = 2) -> Tensor:
    """Nearest-neighbour upsampling of (N, C, H, W) by an integer factor"""
    if x.ndim != 4:
        raise ShapeError(f"upsample_nearest: expected (N, C, H, W), got {x.shape}")
    n, c, h, w = x.shape
    y = x.data.repeat(factor, axis=2).repeat(factor, axis=3)

    def grad_fn(g: np.ndarray):
        return (g.reshape(n, c, h, factor, w, factor).sum(axis=(3, 5)),)

    return emit("upsample_nearest", (x,), y, grad_fn)


# ============================================================================
# Normalization
# ============================================================================

def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """
    Per-channel batch normalization of (N, C, H, W).

    Training mode normalizes with batch statistics and updates the running
    buffers in place; inference mode uses the running buffers.
    """
    if x.ndim != 4 or gamma.shape != (x.shape[1],) or beta.shape != (x.shape[1],):
        raise ShapeError(f"batch_norm: incompatible shapes {x.shape} and {gamma.shape}")

    axes = (0, 2, 3)
    count = x.shape[0] * x.shape[2] * x.shape[3]

    if training:
        mu = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        unbiased = var * count / (count - 1) if count > 1 else var
        running_mean[...] = (1.0 - momentum) * running_mean + momentum * mu
        running_var[...] = (1.0 - momentum) * running_var + momentum * unbiased
    else:
        mu = running_mean.astype(x.dtype)
        var = running_var.astype(x.dtype)

    inv_std = (1.0 / np.sqrt(var + eps)).astype(x.dtype)
    x_hat = (x.data - mu[None, :, None, None]) * inv_std[None, :, None, None]
    y = gamma.data[None, :, None, None] * x_hat + beta.data[None, :, None, None]

    def grad_fn(g: np.ndarray):
        g_gamma = (g * x_hat).sum(axis=axes)
        g_beta = g.sum(axis=axes)
        g_hat = g * gamma.data[None, :, None, None]
        if training:
            g_x = (inv_std[None, :, None, None] / count) * (
                count * g_hat
                - g_hat.sum(axis=axes, keepdims=True)
                - x_hat * (g_hat * x_hat).sum(axis=axes, keepdims=True)
            )
        else:
            g_x = g_hat * inv_std[None, :, None, None]
        return g_x, g_gamma, g_beta

    return emit("batch_norm", (x, gamma, beta), y, grad_fn)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    y = x.data - logsumexp(x.data, axis=axis, keepdims=True)

    def grad_fn(g: np.ndarray):
        return (g - np.exp(y) * g.sum(axis=axis, keepdims=True),)

    return emit("log_softmax", (x,), y.astype(x.dtype), grad_fn)


# ============================================================================
# Structural
# ============================================================================

def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        y = x.data.reshape(tuple(shape))
    except ValueError:
        raise ShapeError(f"reshape: incompatible shapes {x.shape} and {tuple(shape)}") from None

    def grad_fn(g: np.ndarray):
        return (g.reshape(x.shape),)

    return emit("reshape", (x,), y, grad_fn)


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    axes = tuple(range(x.ndim))[::-1] if axes is None else tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ShapeError(f"transpose: incompatible shapes {x.shape} and axes {axes}")
    inverse = tuple(np.argsort(axes))

    def grad_fn(g: np.ndarray):
        return (g.transpose(inverse),)

    return emit("transpose", (x,), np.ascontiguousarray(x.data.transpose(axes)), grad_fn)


def getitem(x: Tensor, index: Any) -> Tensor:
    y = np.array(x.data[index], copy=True)

    def grad_fn(g: np.ndarray):
        full = np.zeros_like(x.data)
        np.add.at(full, index, g)
        return (full,)

    return emit("getitem", (x,), y, grad_fn)


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    """Concatenate along an axis (channel axis by default)"""
    tensors = [as_tensor(t) for t in tensors]
    ref = tensors[0]
    for t in tensors[1:]:
        other = [d for i, d in enumerate(t.shape) if i != axis % t.ndim]
        mine = [d for i, d in enumerate(ref.shape) if i != axis % ref.ndim]
        if t.ndim != ref.ndim or other != mine:
            raise ShapeError(f"concat: incompatible shapes {ref.shape} and {t.shape}")
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def grad_fn(g: np.ndarray):
        return tuple(np.split(g, splits, axis=axis))

    return emit("concat", tuple(tensors), np.concatenate([t.data for t in tensors], axis=axis), grad_fn)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    for t in tensors[1:]:
        if t.shape != tensors[0].shape:
            raise ShapeError(f"stack: incompatible shapes {tensors[0].shape} and {t.shape}")

    def grad_fn(g: np.ndarray):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return emit("stack", tuple(tensors), np.stack([t.data for t in tensors], axis=axis), grad_fn)


# ============================================================================
# Reductions
# ============================================================================

def sum(x: Tensor) -> Tensor:
    def grad_fn(g: np.ndarray):
        return (np.broadcast_to(g, x.shape).copy(),)

    return emit("sum", (x,), np.asarray(x.data.sum(), dtype=x.dtype), grad_fn)


def mean(x: Tensor) -> Tensor:
    size = x.data.size

    def grad_fn(g: np.ndarray):
        return (np.broadcast_to(g / size, x.shape).copy(),)

    return emit("mean", (x,), np.asarray(x.data.mean(), dtype=x.dtype), grad_fn)


def mse(a: Any, b: Any) -> Tensor:
    """Mean over elements of (a - b)^2"""
    a, b = _pair(a, b)
    if a.shape != b.shape:
        raise ShapeError(f"mse: incompatible shapes {a.shape} and {b.shape}")
    diff = a.data - b.data
    size = diff.size

    def grad_fn(g: np.ndarray):
        g_a = (2.0 / size) * diff * g
        return g_a, -g_a

    return emit("mse", (a, b), np.asarray((diff * diff).mean(), dtype=a.dtype), grad_fn)


# ============================================================================
# Recurrent cell
# ============================================================================

def gru_cell(x_proj: Tensor, h: Tensor, w_h: Tensor, b_h: Tensor) -> Tensor:
    """
    One gated-recurrent-unit step.

    Args:
        x_proj: input already projected by the input weights, shape (N, 3H),
            gate order [reset, update, candidate]
        h: previous hidden state (N, H)
        w_h: recurrent weights (H, 3H)
        b_h: recurrent bias (3H,)

    Returns:
        New hidden state (N, H)
    """
    size = h.shape[1]
    if x_proj.ndim != 2 or x_proj.shape[1] != 3 * size or w_h.shape != (size, 3 * size):
        raise ShapeError(f"gru_cell: incompatible shapes {x_proj.shape} and {w_h.shape}")

    h_proj = add(matmul(h, w_h), b_h)
    r = sigmoid(add(x_proj[:, :size], h_proj[:, :size]))
    z = sigmoid(add(x_proj[:, size:2 * size], h_proj[:, size:2 * size]))
    n = tanh(add(x_proj[:, 2 * size:], mul(r, h_proj[:, 2 * size:])))
    return add(n, mul(z, sub(h, n)))
