"""
Minimal reverse-mode differentiation kernel

numpy-backed tensors, a define-by-run tape, the primitives the preprocessor
and approximator networks need, Adam, and a binary weight container.
"""

from .tensor import Tensor, Tape, TapeRecord, as_tensor, backward, no_grad, active_tape
from .optim import Adam, AdamState, adam_step
from .checkpoint import save_checkpoint, load_checkpoint, encode_checkpoint, decode_checkpoint, file_sha256
from .gradcheck import check_gradients, numeric_gradient, GradCheckResult
from . import ops

__all__ = [
    "Tensor",
    "Tape",
    "TapeRecord",
    "as_tensor",
    "backward",
    "no_grad",
    "active_tape",
    "Adam",
    "AdamState",
    "adam_step",
    "save_checkpoint",
    "load_checkpoint",
    "encode_checkpoint",
    "decode_checkpoint",
    "file_sha256",
    "check_gradients",
    "numeric_gradient",
    "GradCheckResult",
    "ops",
]
