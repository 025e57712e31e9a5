"""
Convolutional-recurrent approximator of the unknown-box recognizer

Layout (default widths):

    (N, 1, 32, 128)
      conv3x3 16           -> (N, 16, 32, 128)
      conv3x3 32, stride 2 -> (N, 32, 16, 64)
      conv3x3 64, stride 2 -> (N, 64,  8, 32)
      conv 8x1 64          -> (N, 64,  1, 32)   height collapsed
      columns              -> (T=32, N, 64)
      bidirectional GRU    -> (T, N, 128)
      linear + log_softmax -> (T, N, V+1)

T = width / 4.
"""

from __future__ import annotations

from typing import Any, Optional

import numpy as np

from ..errors import ShapeError
from ..kernel import Tensor, ops
from ..losses.vocab import CharVocab
from .layers import BatchNorm2d, Conv2d, ConvBlock, GRU, Linear, Module
from .preprocessor import ImageLike, as_batch

INPUT_HEIGHT = 32
INPUT_WIDTH = 128
WIDTH_DOWNSAMPLE = 4


class ApproximatorNet(Module):
    """
    Differentiable stand-in for the recognizer: parameters phi.

    Args:
        vocab: output alphabet (head width is vocab.num_classes)
        widths: conv channel widths
        hidden: GRU hidden size per direction
        bidirectional: add a reversed GRU pass
        seed: initialization seed
    """

    kind = "approximator"

    def __init__(
        self,
        vocab: Optional[CharVocab] = None,
        widths: tuple[int, int, int] = (16, 32, 64),
        hidden: int = 64,
        bidirectional: bool = True,
        seed: int = 0,
    ):
        c1, c2, c3 = widths
        rng = np.random.default_rng(seed)
        self.vocab = vocab or CharVocab.default()
        self.widths = tuple(widths)
        self.hidden = hidden
        self.bidirectional = bidirectional
        self.seed = seed

        self.conv1 = ConvBlock(1, c1, rng)
        self.conv2 = ConvBlock(c1, c2, rng, stride=2)
        self.conv3 = ConvBlock(c2, c3, rng, stride=2)
        self.collapse = Conv2d(c3, c3, (INPUT_HEIGHT // WIDTH_DOWNSAMPLE, 1), rng)
        self.collapse_norm = BatchNorm2d(c3)
        self.rnn = GRU(c3, hidden, rng)
        self.rnn_reverse = GRU(c3, hidden, rng) if bidirectional else None
        directions = 2 if bidirectional else 1
        self.head = Linear(directions * hidden, self.vocab.num_classes, rng)
        self.label_parameters()

    def config(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "vocab": self.vocab.to_dict(),
            "widths": list(self.widths),
            "hidden": self.hidden,
            "bidirectional": self.bidirectional,
            "seed": self.seed,
            "downsample": WIDTH_DOWNSAMPLE,
            "input_size": [INPUT_HEIGHT, INPUT_WIDTH],
        }

    @staticmethod
    def timesteps(width: int = INPUT_WIDTH) -> int:
        return width // WIDTH_DOWNSAMPLE

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 4 or x.shape[1:] != (1, INPUT_HEIGHT, INPUT_WIDTH):
            raise ShapeError(
                f"approximator: expected (N, 1, {INPUT_HEIGHT}, {INPUT_WIDTH}), got {x.shape}"
            )
        n = x.shape[0]
        features = self.conv3(self.conv2(self.conv1(x)))
        columns = ops.relu(self.collapse_norm(self.collapse(features)))  # (N, C, 1, T)
        channels, steps = columns.shape[1], columns.shape[3]
        seq = columns.reshape(n, channels, steps).transpose(2, 0, 1)  # (T, N, C)

        out = self.rnn(seq)
        if self.rnn_reverse is not None:
            out = ops.concat([out, self.rnn_reverse(seq, reverse=True)], axis=2)

        logits = self.head(out.reshape(steps * n, out.shape[2]))
        return ops.log_softmax(logits.reshape(steps, n, self.vocab.num_classes), axis=-1)


def approximate(net: ApproximatorNet, image: ImageLike) -> Tensor:
    """
    Per-timestep log-probabilities for a 32x128 crop.

    Returns (T, V+1) for a single (H, W) image, (T, N, V+1) for a batch.
    """
    batch, single = as_batch(image)
    out = net(batch)
    if single:
        return out.reshape(out.shape[0], out.shape[2])
    return out
