"""
Encoder-decoder preprocessor (U-Net style, desk scale)

Three stride-2 stages take a 32x128 crop down to 4x16; the decoder upsamples
back with skip concatenations and ends in a 1-channel sigmoid, so the output
is an image of the input's shape with values in [0, 1].
"""

from __future__ import annotations

from typing import Any, Union

import numpy as np

from ..errors import ShapeError
from ..kernel import Tensor, ops
from .layers import Conv2d, ConvBlock, Module

DOWNSAMPLE = 8

ImageLike = Union[np.ndarray, Tensor]


def as_batch(image: ImageLike) -> tuple[Tensor, bool]:
    """
    Wrap an (H, W) image or an (N, 1, H, W) batch as a 4-D tensor.

    Returns the tensor and whether the input was a single 2-D image.
    """
    tensor = image if isinstance(image, Tensor) else Tensor(np.asarray(image, dtype=np.float32))
    if tensor.ndim == 2:
        return tensor.reshape(1, 1, *tensor.shape), True
    if tensor.ndim == 4 and tensor.shape[1] == 1:
        return tensor, False
    raise ShapeError(f"expected an (H, W) image or (N, 1, H, W) batch, got {tensor.shape}")


class PreprocessorNet(Module):
    """
    Image-to-image network: parameters psi.

    Args:
        widths: encoder channel widths per resolution level
        seed: initialization seed
    """

    kind = "preprocessor"

    def __init__(self, widths: tuple[int, int, int] = (16, 32, 64), seed: int = 0):
        c1, c2, c3 = widths
        rng = np.random.default_rng(seed)
        self.widths = tuple(widths)
        self.seed = seed

        self.enc1 = ConvBlock(1, c1, rng)
        self.enc2 = ConvBlock(c1, c2, rng, stride=2)
        self.enc3 = ConvBlock(c2, c3, rng, stride=2)
        self.bottleneck = ConvBlock(c3, c3, rng, stride=2)
        self.dec3 = ConvBlock(c3 + c3, c3, rng)
        self.dec2 = ConvBlock(c3 + c2, c2, rng)
        self.dec1 = ConvBlock(c2 + c1, c1, rng)
        self.head = Conv2d(c1, 1, 1, rng)
        self.label_parameters()

    def config(self) -> dict[str, Any]:
        return {"kind": self.kind, "widths": list(self.widths), "seed": self.seed, "downsample": DOWNSAMPLE}

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 4 or x.shape[1] != 1:
            raise ShapeError(f"preprocessor: expected (N, 1, H, W), got {x.shape}")
        h, w = x.shape[2], x.shape[3]
        if h % DOWNSAMPLE or w % DOWNSAMPLE:
            raise ShapeError(f"preprocessor: height and width must be multiples of {DOWNSAMPLE}, got {h}x{w} (pad first)")

        s1 = self.enc1(x)
        s2 = self.enc2(s1)
        s3 = self.enc3(s2)
        b = self.bottleneck(s3)
        d3 = self.dec3(ops.concat([ops.upsample_nearest(b), s3], axis=1))
        d2 = self.dec2(ops.concat([ops.upsample_nearest(d3), s2], axis=1))
        d1 = self.dec1(ops.concat([ops.upsample_nearest(d2), s1], axis=1))
        return ops.sigmoid(self.head(d1))


def preprocess(net: PreprocessorNet, image: ImageLike) -> Tensor:
    """g = Preprocessor(I); output keeps the input's layout"""
    batch, single = as_batch(image)
    out = net(batch)
    if single:
        return out.reshape(batch.shape[2], batch.shape[3])
    return out
