"""
Connectionist temporal classification loss

Fused primitive: the forward-backward recursion runs in float64 log space and
the gradient with respect to the log-probabilities is recorded on the tape as
a single closure.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np
from scipy.special import logsumexp

from ..errors import InfeasibleTargetError, ShapeError
from ..kernel import Tensor
from ..kernel.tensor import emit
from .vocab import BLANK_INDEX

Target = Sequence[int]


def min_steps(target: Target) -> int:
    """Fewest timesteps that can emit `target`: one per label plus a blank between repeats"""
    repeats = sum(1 for a, b in zip(target, target[1:]) if a == b)
    return len(target) + repeats


def is_feasible(target: Target, steps: int) -> bool:
    return steps >= min_steps(target)


def _extend(target: Target, blank: int) -> np.ndarray:
    ext = np.full(2 * len(target) + 1, blank, dtype=np.int64)
    ext[1::2] = target
    return ext


def _skip_mask(ext: np.ndarray, blank: int) -> np.ndarray:
    """skip[s]: state s may be entered from s-2"""
    skip = np.zeros(len(ext), dtype=bool)
    if len(ext) > 2:
        skip[2:] = (ext[2:] != blank) & (ext[2:] != ext[:-2])
    return skip


def ctc_forward_backward(log_probs: np.ndarray, target: Target, blank: int = BLANK_INDEX) -> tuple[float, np.ndarray]:
    """
    Negative log-likelihood of `target` and its gradient for one sequence.

    Args:
        log_probs: (T, C) per-step log-probabilities
        target: label indices (blank excluded)
        blank: blank class index

    Returns:
        (loss, grad) with grad of shape (T, C)

    Raises:
        InfeasibleTargetError: T too small for the target under the repeat rule
    """
    lp = np.asarray(log_probs, dtype=np.float64)
    steps, classes = lp.shape
    target = [int(c) for c in target]
    for c in target:
        if c == blank or not 0 <= c < classes:
            raise ValueError(f"ctc_loss: label index {c} outside 0..{classes - 1} or equal to blank")
    if not is_feasible(target, steps):
        raise InfeasibleTargetError(
            f"ctc_loss: target of length {len(target)} needs {min_steps(target)} steps, only {steps} available"
        )

    ext = _extend(target, blank)
    states = len(ext)
    skip = _skip_mask(ext, blank)
    emissions = lp[:, ext]  # (T, S)

    # alpha includes the emission at t
    log_alpha = np.full((steps, states), -np.inf)
    log_alpha[0, 0] = emissions[0, 0]
    if states > 1:
        log_alpha[0, 1] = emissions[0, 1]
    for t in range(1, steps):
        prev = log_alpha[t - 1]
        stay = prev
        step = np.concatenate(([-np.inf], prev[:-1]))
        jump = np.where(skip, np.concatenate(([-np.inf, -np.inf], prev[:-2])), -np.inf)
        log_alpha[t] = np.logaddexp(np.logaddexp(stay, step), jump) + emissions[t]

    ends = log_alpha[-1, -2:] if states > 1 else log_alpha[-1, -1:]
    log_likelihood = logsumexp(ends)

    # beta excludes the emission at t
    log_beta = np.full((steps, states), -np.inf)
    log_beta[-1, -1] = 0.0
    if states > 1:
        log_beta[-1, -2] = 0.0
    for t in range(steps - 2, -1, -1):
        nxt = log_beta[t + 1] + emissions[t + 1]
        stay = nxt
        step = np.concatenate((nxt[1:], [-np.inf]))
        skip_next = np.concatenate((skip[2:], [False, False]))
        jump = np.where(skip_next, np.concatenate((nxt[2:], [-np.inf, -np.inf])), -np.inf)
        log_beta[t] = np.logaddexp(np.logaddexp(stay, step), jump)

    posterior = np.exp(log_alpha + log_beta - log_likelihood)  # (T, S)
    grad = np.zeros_like(lp)
    for s in range(states):
        grad[:, ext[s]] -= posterior[:, s]
    return float(-log_likelihood), grad


def ctc_loss(
    log_probs: Tensor,
    targets: Union[Target, Sequence[Target]],
    reduction: str = "mean",
    blank: int = BLANK_INDEX,
) -> Tensor:
    """
    CTC negative log-likelihood as a differentiable scalar.

    Args:
        log_probs: (T, C) for one sequence or (T, N, C) for a batch
        targets: one index sequence, or N of them for a batch
        reduction: "mean" or "sum" over the batch (per-sequence losses are not
            length-normalized)
        blank: blank class index

    Raises:
        ShapeError: log_probs rank or batch size does not match targets
        InfeasibleTargetError: some target cannot be aligned in T steps
    """
    if reduction not in ("mean", "sum"):
        raise ValueError(f"ctc_loss: unknown reduction {reduction!r}")

    if log_probs.ndim == 2:
        batched = log_probs.data[:, None, :]
        target_list = [list(targets)]  # type: ignore[arg-type]
    elif log_probs.ndim == 3:
        batched = log_probs.data
        target_list = [list(t) for t in targets]  # type: ignore[union-attr]
    else:
        raise ShapeError(f"ctc_loss: expected (T, C) or (T, N, C), got {log_probs.shape}")
    if batched.shape[1] != len(target_list):
        raise ShapeError(f"ctc_loss: incompatible shapes {log_probs.shape} and {len(target_list)} targets")

    losses = []
    grads = np.zeros(batched.shape, dtype=np.float64)
    for n, target in enumerate(target_list):
        try:
            loss_n, grad_n = ctc_forward_backward(batched[:, n, :], target, blank)
        except InfeasibleTargetError as e:
            raise InfeasibleTargetError(f"sample {n}: {e}") from None
        losses.append(loss_n)
        grads[:, n, :] = grad_n

    scale = 1.0 / len(losses) if reduction == "mean" else 1.0
    value = np.asarray(np.sum(losses) * scale, dtype=log_probs.dtype)
    grads *= scale
    if log_probs.ndim == 2:
        grads = grads[:, 0, :]

    def grad_fn(g: np.ndarray):
        return (grads * g,)

    return emit("ctc_loss", (log_probs,), value, grad_fn)
