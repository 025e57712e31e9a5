"""
Crop geometry: content is anchored at the left edge and centered vertically
"""

import numpy as np

from ..errors import ShapeError

WHITE = 1.0


def _row_offset(inner: int, outer: int) -> int:
    return (outer - inner) // 2


def pad_to(image: np.ndarray, width: int, height: int, fill: float = WHITE) -> np.ndarray:
    """
    Place image at the left edge, vertically centered, on a fill-valued canvas.

    Raises:
        ShapeError: image larger than the target in either dimension
    """
    h, w = image.shape
    if h > height or w > width:
        raise ShapeError(f"pad_to: image {w}x{h} larger than target {width}x{height}")
    if (h, w) == (height, width):
        return image.copy()
    canvas = np.full((height, width), fill, dtype=image.dtype if image.dtype.kind == "f" else np.float32)
    top = _row_offset(h, height)
    canvas[top:top + h, :w] = image
    return canvas


def crop_to(image: np.ndarray, width: int, height: int) -> np.ndarray:
    """Inverse of pad_to: recover the width x height region pad_to wrote"""
    h, w = image.shape
    if height > h or width > w:
        raise ShapeError(f"crop_to: target {width}x{height} larger than image {w}x{h}")
    top = _row_offset(height, h)
    return image[top:top + height, :width].copy()
