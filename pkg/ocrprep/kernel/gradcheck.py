"""
Central finite-difference gradient checking

Inputs are promoted to float64 so the numerical derivative is not dominated
by single-precision rounding.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor import Tape, Tensor, backward, no_grad


@dataclass
class GradCheckResult:
    """Outcome of a gradient check"""
    passed: bool
    max_rel_error: float
    worst_input: int
    worst_index: tuple[int, ...]


def numeric_gradient(fn: Callable[..., Tensor], inputs: Sequence[Tensor], which: int, h: float = 1e-4) -> np.ndarray:
    """d fn(*inputs) / d inputs[which] by central differences (fn must return a scalar)"""
    target = inputs[which]
    grad = np.zeros_like(target.data, dtype=np.float64)
    flat = target.data.reshape(-1)
    with no_grad():
        for k in range(flat.size):
            saved = flat[k]
            flat[k] = saved + h
            plus = fn(*inputs).item()
            flat[k] = saved - h
            minus = fn(*inputs).item()
            flat[k] = saved
            grad.reshape(-1)[k] = (plus - minus) / (2.0 * h)
    return grad


def check_gradients(
    fn: Callable[..., Tensor],
    arrays: Sequence[np.ndarray],
    rtol: float = 1e-3,
    atol: float = 1e-5,
    h: float = 1e-4,
) -> GradCheckResult:
    """
    Compare analytic and numerical gradients of a scalar function.

    An entry passes when |a - n| <= atol or |a - n| / max(|a|, |n|) <= rtol.

    Args:
        fn: maps tensors to a scalar tensor using kernel primitives
        arrays: input values (copied to float64)
        rtol: relative tolerance
        atol: absolute tolerance near zero
        h: finite-difference step
    """
    inputs = [Tensor(np.array(a, dtype=np.float64), requires_grad=True) for a in arrays]
    with Tape() as tape:
        out = fn(*inputs)
    backward(tape, out)
    analytic = [t.grad.copy() for t in inputs]

    worst = (0.0, 0, ())
    passed = True
    for i in range(len(inputs)):
        numeric = numeric_gradient(fn, inputs, i, h)
        diff = np.abs(analytic[i] - numeric)
        scale = np.maximum(np.abs(analytic[i]), np.abs(numeric))
        rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)
        ok = (diff <= atol) | (rel <= rtol)
        if not ok.all():
            passed = False
        rel_masked = np.where(diff <= atol, 0.0, rel)
        if rel_masked.size and rel_masked.max() > worst[0]:
            idx = np.unravel_index(int(rel_masked.argmax()), rel_masked.shape)
            worst = (float(rel_masked.max()), i, tuple(int(j) for j in idx))
    return GradCheckResult(passed=passed, max_rel_error=worst[0], worst_input=worst[1], worst_index=worst[2])
