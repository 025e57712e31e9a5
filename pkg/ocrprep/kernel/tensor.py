"""
Tensor and Tape: define-by-run reverse-mode differentiation

A Tape is opened with a `with` block. Every primitive executed while a tape is
active, and that has at least one input requiring gradients, appends a record
to it. `backward` replays the records in reverse order exactly once.

Outside of any tape, primitives compute values only (inference mode).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from ..errors import GradientError, ShapeError

DEFAULT_DTYPE = np.float32

_local = threading.local()


def _tape_stack() -> list["Tape"]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def active_tape() -> Optional["Tape"]:
    """Innermost tape opened on this thread, if any"""
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """
    N-dimensional array of reals with an optional gradient buffer.

    Attributes:
        data: numpy array holding the values (float32 unless built otherwise)
        requires_grad: whether gradients flow into this tensor
        grad: same-shape buffer, allocated when requires_grad is set
        name: optional label (parameters carry their dotted path)
    """

    __array_priority__ = 100

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        name: str = "",
        dtype: Any = None,
    ):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is not None:
            array = np.asarray(data, dtype=dtype)
        else:
            array = np.asarray(data)
            if array.dtype not in (np.float32, np.float64):
                array = array.astype(DEFAULT_DTYPE)
        self.data: np.ndarray = array
        self.name = name
        self.grad: Optional[np.ndarray] = None
        self._requires_grad = False
        self.requires_grad = requires_grad

        # Set when produced by a recorded primitive
        self._tape: Optional[Tape] = None
        self._index: int = -1

    # ------------------------------------------------------------------
    # Gradient bookkeeping
    # ------------------------------------------------------------------

    @property
    def requires_grad(self) -> bool:
        return self._requires_grad

    @requires_grad.setter
    def requires_grad(self, value: bool) -> None:
        self._requires_grad = bool(value)
        if self._requires_grad and (self.grad is None or self.grad.shape != self.data.shape):
            self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0.0)

    def detach(self) -> "Tensor":
        """Copy of the values with no gradient tracking"""
        return Tensor(self.data.copy())

    def numpy(self) -> np.ndarray:
        return self.data

    # ------------------------------------------------------------------
    # Shape helpers
    # ------------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item: tensor of shape {self.shape} is not a scalar")
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, requires_grad={self.requires_grad})"

    # ------------------------------------------------------------------
    # Operator sugar (implementations live in ops.py)
    # ------------------------------------------------------------------

    def __add__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.add(self, other)

    def __radd__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.add(other, self)

    def __sub__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.mul(other, self)

    def __neg__(self) -> "Tensor":
        from . import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from . import ops
        return ops.matmul(self, other)

    def __getitem__(self, index: Any) -> "Tensor":
        from . import ops
        return ops.getitem(self, index)

    def reshape(self, *shape: Any) -> "Tensor":
        from . import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes: int) -> "Tensor":
        from . import ops
        return ops.transpose(self, axes if axes else None)

    def sum(self) -> "Tensor":
        from . import ops
        return ops.sum(self)

    def mean(self) -> "Tensor":
        from . import ops
        return ops.mean(self)


def as_tensor(value: Any, dtype: Any = None) -> Tensor:
    """Wrap constants; tensors pass through untouched"""
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype if dtype is not None else DEFAULT_DTYPE))


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class TapeRecord:
    """One executed primitive"""
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """
    Ordered record of primitives executed while the tape is active.

    Usage:
        with Tape() as tape:
            loss = model_loss(...)
        backward(tape, loss)
    """

    def __init__(self):
        self.records: list[TapeRecord] = []

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc: Any) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()
        elif self in stack:
            stack.remove(self)

    def __len__(self) -> int:
        return len(self.records)

    def record(self, op: str, inputs: Sequence[Tensor], output: Tensor, backward_fn: BackwardFn) -> None:
        output._tape = self
        output._index = len(self.records)
        self.records.append(TapeRecord(op, tuple(inputs), output, backward_fn))

    def ops(self) -> list[str]:
        return [record.op for record in self.records]


class no_grad:
    """Context that suspends recording (values only)"""

    def __enter__(self) -> None:
        self._saved = list(_tape_stack())
        _tape_stack().clear()

    def __exit__(self, *exc: Any) -> None:
        stack = _tape_stack()
        stack.clear()
        stack.extend(self._saved)


def emit(op: str, inputs: Sequence[Tensor], value: np.ndarray, backward_fn: BackwardFn) -> Tensor:
    """
    Wrap a primitive's result and record it on the active tape.

    The output requires gradients iff a tape is active and some input does.
    """
    tape = active_tape()
    tracked = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(value)
    if tracked:
        out._requires_grad = True
        tape.record(op, inputs, out, backward_fn)
    return out


def backward(
    tape: Tape,
    loss: Tensor,
    grad: Optional[np.ndarray] = None,
    params: Optional[Iterable[Tensor]] = None,
) -> None:
    """
    Propagate d(loss)/d(tensor) to every tensor on the tape.

    Leaf tensors that appear on the tape have their grad buffers reset before
    accumulation, so after the call each holds exactly the derivative of this
    loss. Tensors listed in `params` are reset too: those that took no part in
    the loss end with a zero gradient. Intermediate outputs receive their
    gradient in `.grad` as well.

    Args:
        tape: tape the loss was produced on
        loss: scalar tensor, or any tensor when `grad` is given
        grad: optional seed gradient, same shape as `loss`
        params: every tensor the caller will read gradients from

    Raises:
        GradientError: loss not on this tape, or non-scalar loss without seed
    """
    if loss._tape is not tape:
        raise GradientError("backward: loss was not produced on this tape")
    if grad is None:
        if loss.data.size != 1:
            raise GradientError(f"backward: loss must be scalar, got shape {loss.shape}")
        seed = np.ones_like(loss.data)
    else:
        seed = np.asarray(grad, dtype=loss.dtype)
        if seed.shape != loss.shape:
            raise ShapeError(f"backward: seed gradient shape {seed.shape} != output shape {loss.shape}")

    for param in params or ():
        if param.requires_grad:
            param.grad = np.zeros_like(param.data)

    records = tape.records[: loss._index + 1]

    for record in records:
        for tensor in record.inputs:
            if tensor.requires_grad and tensor._tape is not tape:
                tensor.grad = np.zeros_like(tensor.data)

    pending: dict[int, np.ndarray] = {id(loss): seed}
    for record in reversed(records):
        out_grad = pending.pop(id(record.output), None)
        if out_grad is None:
            continue
        record.output.grad = out_grad
        in_grads = record.backward(out_grad)
        for tensor, in_grad in zip(record.inputs, in_grads):
            if in_grad is None or not tensor.requires_grad:
                continue
            in_grad = np.asarray(in_grad, dtype=tensor.dtype)
            if in_grad.shape != tensor.shape:
                raise ShapeError(
                    f"backward[{record.op}]: gradient shape {in_grad.shape} != input shape {tensor.shape}"
                )
            if tensor._tape is tape:
                key = id(tensor)
                if key in pending:
                    pending[key] = pending[key] + in_grad
                else:
                    pending[key] = in_grad
            else:
                tensor.grad += in_grad
