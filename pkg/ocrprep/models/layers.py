"""
Layer building blocks on top of the kernel

Modules hold parameters as Tensor attributes and running statistics as numpy
array attributes (buffers). Traversal follows attribute definition order, so
parameter names and checkpoint record order are stable.
"""

from __future__ import annotations

from typing import Any, Iterator, Optional

import numpy as np

from ..errors import CheckpointError
from ..kernel import Tensor, ops


# ============================================================================
# Initializers
# ============================================================================

def he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(np.float32)


def orthogonal(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return q[:rows, :cols].astype(np.float32)


def parameter(value: np.ndarray) -> Tensor:
    return Tensor(np.asarray(value, dtype=np.float32), requires_grad=True)


# ============================================================================
# Module base
# ============================================================================

class Module:
    """Base class: parameter traversal, train/eval mode, freezing, state dicts"""

    training: bool = True

    def forward(self, *args: Any, **kwargs: Any) -> Any:
        raise NotImplementedError

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    def _children(self) -> Iterator[tuple[str, Any]]:
        for name, value in vars(self).items():
            if name.startswith("_"):
                continue
            if isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{name}.{i}", item
            else:
                yield name, value

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, value in self._children():
            if isinstance(value, Tensor):
                yield prefix + name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(prefix + name + ".")

    def named_buffers(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        for name, value in self._children():
            if isinstance(value, np.ndarray):
                yield prefix + name, value
            elif isinstance(value, Module):
                yield from value.named_buffers(prefix + name + ".")

    def modules(self) -> Iterator["Module"]:
        yield self
        for _, value in self._children():
            if isinstance(value, Module):
                yield from value.modules()

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def label_parameters(self) -> None:
        """Store each parameter's dotted path in its name"""
        for name, param in self.named_parameters():
            param.name = name

    def train(self, mode: bool = True) -> "Module":
        for module in self.modules():
            module.training = mode
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def freeze(self) -> None:
        for param in self.parameters():
            param.requires_grad = False

    def unfreeze(self) -> None:
        for param in self.parameters():
            param.requires_grad = True

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        state = {name: p.data.copy() for name, p in self.named_parameters()}
        state.update({name: b.copy() for name, b in self.named_buffers()})
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        targets: dict[str, np.ndarray] = {name: p.data for name, p in self.named_parameters()}
        targets.update(dict(self.named_buffers()))
        missing = sorted(set(targets) - set(state))
        unexpected = sorted(set(state) - set(targets))
        if missing or unexpected:
            raise CheckpointError(f"state mismatch: missing={missing[:5]} unexpected={unexpected[:5]}")
        for name, target in targets.items():
            value = np.asarray(state[name])
            if value.shape != target.shape:
                raise CheckpointError(f"{name}: checkpoint shape {value.shape} != model shape {target.shape}")
            target[...] = value


# ============================================================================
# Layers
# ============================================================================

class Conv2d(Module):
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: tuple[int, int] | int,
        rng: np.random.Generator,
        stride: tuple[int, int] | int = 1,
        padding: tuple[int, int] | int = 0,
    ):
        kh, kw = (kernel_size, kernel_size) if isinstance(kernel_size, int) else kernel_size
        self.weight = parameter(he_uniform(rng, (out_channels, in_channels, kh, kw), in_channels * kh * kw))
        self.bias = parameter(np.zeros(out_channels, dtype=np.float32))
        self._stride = stride
        self._padding = padding

    def forward(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.weight, self.bias, stride=self._stride, padding=self._padding)


class BatchNorm2d(Module):
    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        self.gamma = parameter(np.ones(channels, dtype=np.float32))
        self.beta = parameter(np.zeros(channels, dtype=np.float32))
        self.running_mean = np.zeros(channels, dtype=np.float32)
        self.running_var = np.ones(channels, dtype=np.float32)
        self._momentum = momentum
        self._eps = eps

    def forward(self, x: Tensor) -> Tensor:
        return ops.batch_norm(
            x, self.gamma, self.beta, self.running_mean, self.running_var,
            training=self.training, momentum=self._momentum, eps=self._eps,
        )


class ConvBlock(Module):
    """3x3 conv -> batch norm -> ReLU"""

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator, stride: int = 1):
        self.conv = Conv2d(in_channels, out_channels, 3, rng, stride=stride, padding=1)
        self.norm = BatchNorm2d(out_channels)

    def forward(self, x: Tensor) -> Tensor:
        return ops.relu(self.norm(self.conv(x)))


class Linear(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.weight = parameter(he_uniform(rng, (in_features, out_features), in_features))
        self.bias = parameter(np.zeros(out_features, dtype=np.float32))

    def forward(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.weight), self.bias)


class GRU(Module):
    """
    Single-layer gated recurrent unit over a (T, N, input) sequence.

    Input weights are He-uniform; each recurrent gate block is orthogonal.
    """

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator):
        self.w_x = parameter(he_uniform(rng, (input_size, 3 * hidden_size), input_size))
        self.b_x = parameter(np.zeros(3 * hidden_size, dtype=np.float32))
        self.w_h = parameter(np.concatenate([orthogonal(rng, hidden_size, hidden_size) for _ in range(3)], axis=1))
        self.b_h = parameter(np.zeros(3 * hidden_size, dtype=np.float32))
        self._hidden = hidden_size

    def forward(self, seq: Tensor, reverse: bool = False, h0: Optional[Tensor] = None) -> Tensor:
        steps, batch, features = seq.shape
        projected = ops.add(ops.matmul(seq.reshape(steps * batch, features), self.w_x), self.b_x)
        projected = projected.reshape(steps, batch, 3 * self._hidden)

        h = h0 if h0 is not None else Tensor(np.zeros((batch, self._hidden), dtype=seq.dtype))
        order = range(steps - 1, -1, -1) if reverse else range(steps)
        outputs: list[Optional[Tensor]] = [None] * steps
        for t in order:
            h = ops.gru_cell(projected[t], h, self.w_h, self.b_h)
            outputs[t] = h
        return ops.stack(outputs, axis=0)
