"""
Helpers shared by the trainers
"""

from __future__ import annotations

from typing import Iterator, Optional, Sequence

import numpy as np

from ..data.render import Sample
from ..kernel import Tensor


def stack_images(images: Sequence[np.ndarray]) -> Tensor:
    """(N, 1, H, W) constant tensor from (H, W) images"""
    return Tensor(np.stack(images)[:, None, :, :].astype(np.float32))


def epoch_batches(
    samples: Sequence[Sample],
    batch_size: int,
    rng: np.random.Generator,
    max_samples: Optional[int] = None,
) -> Iterator[list[Sample]]:
    """Seeded shuffle, optional cap, then consecutive batches"""
    order = rng.permutation(len(samples))
    if max_samples is not None:
        order = order[:max_samples]
    for start in range(0, len(order), batch_size):
        yield [samples[int(i)] for i in order[start:start + batch_size]]


def mean_or_none(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None
