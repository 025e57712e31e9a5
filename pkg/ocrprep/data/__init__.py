"""
Synthetic degraded-word data: glyph atlas, degradations, rendering, datasets
"""

from .glyphs import GlyphAtlas, FONT_5X7, get_atlas
from .degrade import DegradationConfig, degrade
from .geometry import pad_to, crop_to
from .render import Sample, render_word, clean_word, CROP_WIDTH, CROP_HEIGHT
from .dataset import (
    DatasetManifest,
    generate_dataset,
    load_dataset,
    iter_dataset,
    split_manifest,
    load_word_list,
    random_word,
    read_png,
    write_png,
    to_uint8,
    SPLITS,
    DEFAULT_COUNTS,
)

__all__ = [
    "GlyphAtlas",
    "FONT_5X7",
    "get_atlas",
    "DegradationConfig",
    "degrade",
    "pad_to",
    "crop_to",
    "Sample",
    "render_word",
    "clean_word",
    "CROP_WIDTH",
    "CROP_HEIGHT",
    "DatasetManifest",
    "generate_dataset",
    "load_dataset",
    "iter_dataset",
    "split_manifest",
    "load_word_list",
    "random_word",
    "read_png",
    "write_png",
    "to_uint8",
    "SPLITS",
    "DEFAULT_COUNTS",
]
