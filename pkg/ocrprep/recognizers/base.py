"""
Unknown-box recognizer contract

A recognizer maps a [0, 1] grayscale image to text. Nothing about its
internals is visible to training: no scores, no gradients. Failures are raised
as RecognitionError, which is distinct from returning empty text.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, Union, runtime_checkable

import numpy as np

from ..errors import RecognitionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecognizerCapabilities:
    """Declared behaviour of a recognizer implementation"""
    concurrent_calls_safe: bool
    max_image_size: tuple[int, int]  # (height, width)
    deterministic: bool
    max_concurrency: int = 1


@runtime_checkable
class Recognizer(Protocol):
    """Opaque image -> text function"""

    name: str

    @property
    def capabilities(self) -> RecognizerCapabilities: ...

    def recognize(self, image: np.ndarray) -> str: ...


def prepare_image(image: np.ndarray, capabilities: RecognizerCapabilities) -> np.ndarray:
    """
    Clamp to [0, 1] and check the size limit.

    Raises:
        RecognitionError: not a 2-D image, or larger than the recognizer accepts
    """
    array = np.asarray(image, dtype=np.float32)
    if array.ndim != 2:
        raise RecognitionError(f"expected a 2-D grayscale image, got shape {array.shape}")
    max_h, max_w = capabilities.max_image_size
    if array.shape[0] > max_h or array.shape[1] > max_w:
        raise RecognitionError(f"image {array.shape[1]}x{array.shape[0]} exceeds limit {max_w}x{max_h}")
    return np.clip(array, 0.0, 1.0)


RecognitionResult = Union[str, RecognitionError]


def recognize_many(recognizer: Recognizer, images: Sequence[np.ndarray]) -> list[RecognitionResult]:
    """
    Recognize a batch of independent images.

    Runs concurrently when the recognizer declares it safe; results are always
    returned in input order. A failing image yields its RecognitionError in
    place of text instead of aborting the batch.
    """
    def one(image: np.ndarray) -> RecognitionResult:
        try:
            return recognizer.recognize(image)
        except RecognitionError as e:
            return e

    caps = recognizer.capabilities
    if caps.concurrent_calls_safe and caps.max_concurrency > 1 and len(images) > 1:
        with ThreadPoolExecutor(max_workers=min(caps.max_concurrency, len(images))) as pool:
            return list(pool.map(one, images))
    return [one(image) for image in images]


def failures(results: Sequence[RecognitionResult]) -> list[int]:
    """Indices of results that are errors"""
    return [i for i, r in enumerate(results) if isinstance(r, RecognitionError)]


def text_or_none(result: RecognitionResult) -> Optional[str]:
    return None if isinstance(result, RecognitionError) else result
