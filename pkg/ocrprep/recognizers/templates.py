"""
Template-matching recognizer

Pipeline: binarize (ink = pixel below threshold), optionally thicken strokes
downward, split into segments at runs of ink-free columns, score every segment
against every glyph template by normalized cross-correlation in one product,
keep the best character if it reaches tau.
Output is discrete text; no step is differentiable or touches a tape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..data.geometry import pad_to
from ..data.glyphs import GlyphAtlas
from ..data.render import CROP_HEIGHT, CROP_WIDTH
from .base import RecognizerCapabilities, prepare_image

DEFAULT_TAU = 0.6


def _normalize_rows(rows: np.ndarray) -> np.ndarray:
    """Center and scale each row to unit norm; constant rows become zero"""
    centered = rows - rows.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1, keepdims=True)
    return np.where(norms > 0, centered / np.where(norms > 0, norms, 1.0), 0.0)


def _frame(mask: np.ndarray, width: int) -> np.ndarray:
    framed = np.zeros((mask.shape[0], width), dtype=np.float64)
    framed[:, :mask.shape[1]] = mask
    return framed


@dataclass
class GlyphTemplateSet:
    """
    One full-height binary template per character.

    Templates are the atlas glyphs placed the way words are rendered: at the
    crop height, vertically centered, or from row `top` when given.
    """
    atlas: GlyphAtlas
    tau: float = DEFAULT_TAU
    height: int = CROP_HEIGHT
    top: Optional[int] = None
    templates: dict[str, np.ndarray] = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"GlyphTemplateSet: tau must lie in [0, 1], got {self.tau}")
        self.templates = {}
        for ch, glyph in self.atlas.glyphs.items():
            self.templates[ch] = self._place(glyph)
        self._chars = list(self.templates)
        self._frame_width = max(t.shape[1] for t in self.templates.values())
        self._bank = self._build_bank(self._frame_width)

    def _place(self, glyph: np.ndarray) -> np.ndarray:
        if self.top is None:
            return pad_to(glyph.astype(np.float32), glyph.shape[1], self.height, fill=0.0) > 0.5
        if not 0 <= self.top <= self.height - glyph.shape[0]:
            raise ValueError(f"GlyphTemplateSet: top row {self.top} leaves no room for {glyph.shape[0]} px glyphs")
        placed = np.zeros((self.height, glyph.shape[1]), dtype=bool)
        placed[self.top:self.top + glyph.shape[0]] = glyph
        return placed

    def _build_bank(self, width: int) -> np.ndarray:
        rows = np.stack([_frame(self.templates[ch], width).reshape(-1) for ch in self._chars])
        return _normalize_rows(rows)

    @property
    def chars(self) -> str:
        return "".join(self._chars)

    def scores(self, segment: np.ndarray) -> np.ndarray:
        """Normalized cross-correlation of a (height, w) ink mask with every template"""
        width = max(self._frame_width, segment.shape[1])
        bank = self._bank if width == self._frame_width else self._build_bank(width)
        query = _normalize_rows(_frame(segment, width).reshape(1, -1))
        return bank @ query[0]

    def best_match(self, segment: np.ndarray) -> tuple[str, float]:
        scores = self.scores(segment)
        best = int(np.argmax(scores))
        return self._chars[best], float(scores[best])

    def best_matches(self, segments: list[np.ndarray]) -> list[tuple[str, float]]:
        """best_match for many segments; those within the template frame share one matrix product"""
        matches: list[Optional[tuple[str, float]]] = [None] * len(segments)
        narrow = [i for i, s in enumerate(segments) if s.shape[1] <= self._frame_width]
        if narrow:
            rows = np.stack([_frame(segments[i], self._frame_width).reshape(-1) for i in narrow])
            scores = self._bank @ _normalize_rows(rows).T
            best = scores.argmax(axis=0)
            for j, i in enumerate(narrow):
                matches[i] = (self._chars[best[j]], float(scores[best[j], j]))
        for i, segment in enumerate(segments):
            if matches[i] is None:
                matches[i] = self.best_match(segment)
        return matches


def segment_columns(ink: np.ndarray) -> list[tuple[int, int]]:
    """[start, end) column spans of consecutive inked columns, left to right"""
    inked = np.concatenate(([False], ink.any(axis=0), [False]))
    edges = np.flatnonzero(inked[1:] != inked[:-1])
    return [(int(a), int(b)) for a, b in zip(edges[::2], edges[1::2])]


def thicken_strokes(ink: np.ndarray, rows: int) -> np.ndarray:
    """OR the mask with itself shifted `rows` down; columns are unchanged"""
    if rows <= 0:
        return ink
    thick = ink.copy()
    thick[rows:] |= ink[:-rows]
    return thick


def template_recognize(image: np.ndarray, templates: GlyphTemplateSet, threshold: float = 0.5, thicken: int = 0) -> str:
    """Binarize, thicken, segment by blank columns, match each segment; worst case empty"""
    if image.shape[0] < templates.height:
        image = pad_to(image, image.shape[1], templates.height)
    ink = thicken_strokes(image < threshold, thicken)
    segments = [ink[:, start:end] for start, end in segment_columns(ink)]
    return "".join(ch for ch, score in templates.best_matches(segments) if score >= templates.tau)


class TemplateRecognizer:
    """
    Deterministic, pure recognizer over a glyph template set.

    Args:
        templates: glyph templates and acceptance threshold tau
        threshold: binarization level (ink is darker than this)
        name: identifier used in reports
        thicken: rows each ink pixel is smeared downward before segmentation
    """

    def __init__(self, templates: GlyphTemplateSet, threshold: float = 0.5, name: str = "template", thicken: int = 0):
        if thicken < 0:
            raise ValueError(f"TemplateRecognizer: thicken must be >= 0, got {thicken}")
        self.templates = templates
        self.threshold = threshold
        self.thicken = thicken
        self.name = name
        self._capabilities = RecognizerCapabilities(
            concurrent_calls_safe=True,
            max_image_size=(templates.height, 4 * CROP_WIDTH),
            deterministic=True,
            max_concurrency=4,
        )

    @property
    def capabilities(self) -> RecognizerCapabilities:
        return self._capabilities

    def recognize(self, image: np.ndarray) -> str:
        return template_recognize(prepare_image(image, self._capabilities), self.templates, self.threshold, self.thicken)

    def __repr__(self) -> str:
        return f"TemplateRecognizer(name={self.name!r}, tau={self.templates.tau}, threshold={self.threshold})"


def engine_a(tau: float = DEFAULT_TAU) -> TemplateRecognizer:
    """Regular glyph templates, binarization at 0.5"""
    return TemplateRecognizer(GlyphTemplateSet(GlyphAtlas.regular(), tau), threshold=0.5, name="template-a")


def engine_b(tau: float = DEFAULT_TAU) -> TemplateRecognizer:
    """
    Bold glyph templates, binarization at 0.35.

    Strokes are thickened by one font row before matching, which turns a
    regular glyph into its bold form; templates sit where regular glyphs are
    rendered so that the thickened glyph lines up with them.
    """
    regular, bold = GlyphAtlas.regular(), GlyphAtlas.bold()
    top = (CROP_HEIGHT - regular.height) // 2
    templates = GlyphTemplateSet(bold, tau, top=top)
    return TemplateRecognizer(templates, threshold=0.35, name="template-b", thicken=bold.height - regular.height)
