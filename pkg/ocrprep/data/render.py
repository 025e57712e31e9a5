"""
Word rendering
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .degrade import DegradationConfig, degrade
from .geometry import pad_to
from .glyphs import GlyphAtlas

CROP_WIDTH = 128
CROP_HEIGHT = 32

Seed = Union[int, Sequence[int]]


@dataclass
class Sample:
    """One word crop: image (32x128, [0, 1]) plus ground-truth text"""
    image: np.ndarray
    text: str
    degradation: DegradationConfig = field(default_factory=DegradationConfig)
    path: str = ""


def clean_word(text: str, atlas: GlyphAtlas, width: int = CROP_WIDTH, height: int = CROP_HEIGHT) -> np.ndarray:
    """
    Undegraded crop: black glyphs on white, left-anchored, vertically centered.

    Raises:
        ValueError: unknown character, or text wider than the crop
    """
    unknown = sorted({ch for ch in text if ch not in atlas.glyphs})
    if unknown:
        raise ValueError(f"render_word: characters {unknown} not in atlas {atlas.name!r}")
    text_width = atlas.text_width(text)
    if text_width > width:
        raise ValueError(f"render_word: {text!r} is {text_width} px wide, crop is {width} px")
    strip = np.where(atlas.ink_mask(text), 0.0, 1.0).astype(np.float32)
    if strip.shape[1] == 0:
        return np.ones((height, width), dtype=np.float32)
    return pad_to(strip, width, height)


def render_word(text: str, atlas: GlyphAtlas, deg: DegradationConfig, seed: Seed) -> Sample:
    """Deterministic function of (text, atlas, deg, seed)"""
    image = clean_word(text, atlas)
    if not deg.is_identity():
        image = degrade(image, deg, np.random.default_rng(seed))
    return Sample(image=image, text=text, degradation=deg)
