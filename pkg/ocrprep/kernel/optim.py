"""
Adam optimizer with bias correction
"""

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..errors import GradientError
from .tensor import Tensor


@dataclass
class AdamState:
    """Per-parameter Adam moments"""
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_param(cls, param: Tensor, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(
            m=np.zeros(param.shape, dtype=np.float64),
            v=np.zeros(param.shape, dtype=np.float64),
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_step(param: Tensor, state: AdamState) -> None:
    """
    Apply one Adam update to `param` in place and advance `state`.

    Raises:
        GradientError: the parameter has no gradient buffer
    """
    if param.grad is None:
        raise GradientError(f"adam_step: parameter {param.name or param.shape} has no gradient")
    if state.m.shape != param.shape:
        raise GradientError(f"adam_step: state shape {state.m.shape} != parameter shape {param.shape}")

    g = param.grad.astype(np.float64)
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    update = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    param.data -= update.astype(param.dtype)


@dataclass
class Adam:
    """Adam over a fixed parameter list; frozen parameters are skipped"""
    params: list[Tensor]
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    states: list[AdamState] = field(init=False)

    def __post_init__(self):
        self.params = list(self.params)
        self.states = [
            AdamState.for_param(p, self.lr, self.beta1, self.beta2, self.eps) for p in self.params
        ]

    @classmethod
    def over(cls, params: Iterable[Tensor], lr: float) -> "Adam":
        return cls(params=list(params), lr=lr)

    def step(self) -> None:
        for param, state in zip(self.params, self.states):
            if param.requires_grad:
                adam_step(param, state)

    def zero_grad(self) -> None:
        for param in self.params:
            param.zero_grad()
