"""
Image-space loss terms and the composite preprocessor objective
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ..kernel import Tensor, ops
from .ctc import Target, ctc_loss


def mse_to_white(g: Tensor) -> Tensor:
    """Mean over pixels of (1 - g)^2"""
    return ops.mse(g, np.ones(g.shape, dtype=g.dtype))


@dataclass
class CompositeLoss:
    """The total plus its two terms (terms kept for logging)"""
    total: Tensor
    ctc: Tensor
    mse: Tensor


def composite_terms(
    approx_out: Tensor,
    g: Tensor,
    targets: Union[Target, Sequence[Target]],
    beta: float,
) -> CompositeLoss:
    ctc = ctc_loss(approx_out, targets)
    mse = mse_to_white(g)
    if beta == 0.0:
        return CompositeLoss(total=ctc, ctc=ctc, mse=mse)
    return CompositeLoss(total=ops.add(ctc, ops.mul(mse, beta)), ctc=ctc, mse=mse)


def composite_loss(
    approx_out: Tensor,
    g: Tensor,
    targets: Union[Target, Sequence[Target]],
    beta: float = 1.0,
) -> Tensor:
    """
    CTC of the approximator output against the ground truth plus
    beta times the distance of the preprocessed image from a white page.
    """
    return composite_terms(approx_out, g, targets, beta).total
