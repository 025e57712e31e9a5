"""
Embedded bitmap font

A 5x7 pixel font for A-Z and 0-9, cropped to each glyph's ink columns and
scaled 3x (glyph cells of at most 15x21 px). Every column inside a glyph
carries ink, so blank-column segmentation never splits a clean glyph. With a
one-pixel gap, eight of the widest glyphs span 127 px and fit a 128 px crop.

The same atlas renders the dataset and builds the template recognizer, so a
clean rendering matches its templates exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

FONT_5X7: dict[str, tuple[str, ...]] = {
    "A": (".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "B": ("####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."),
    "C": (".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."),
    "D": ("####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."),
    "E": ("#####", "#....", "#....", "####.", "#....", "#....", "#####"),
    "F": ("#####", "#....", "#....", "####.", "#....", "#....", "#...."),
    "G": (".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"),
    "H": ("#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "I": (".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "J": ("..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."),
    "K": ("#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"),
    "L": ("#....", "#....", "#....", "#....", "#....", "#....", "#####"),
    "M": ("#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"),
    "N": ("#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"),
    "O": (".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "P": ("####.", "#...#", "#...#", "####.", "#....", "#....", "#...."),
    "Q": (".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"),
    "R": ("####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"),
    "S": (".####", "#....", "#....", ".###.", "....#", "....#", "####."),
    "T": ("#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."),
    "U": ("#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "V": ("#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."),
    "W": ("#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."),
    "X": ("#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"),
    "Y": ("#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."),
    "Z": ("#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"),
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": ("#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
}

SCALE = 3
GAP = 1


def _parse(rows: tuple[str, ...]) -> np.ndarray:
    return np.array([[c == "#" for c in row] for row in rows], dtype=bool)


def _crop_columns(bitmap: np.ndarray) -> np.ndarray:
    inked = np.flatnonzero(bitmap.any(axis=0))
    if inked.size == 0:
        return bitmap[:, :0]
    return bitmap[:, inked[0]:inked[-1] + 1]


def _embolden(bitmap: np.ndarray) -> np.ndarray:
    """Thicken horizontal strokes by one font row (glyph grows one row taller)"""
    tall = np.zeros((bitmap.shape[0] + 1, bitmap.shape[1]), dtype=bool)
    tall[:-1] |= bitmap
    tall[1:] |= bitmap
    return tall


@dataclass(frozen=True)
class GlyphAtlas:
    """
    Per-character ink masks (True = ink) of a common height.

    Attributes:
        name: atlas identifier recorded in manifests and recognizer ids
        glyphs: character -> bool mask of shape (height, glyph width)
        gap: blank columns between adjacent glyphs
    """
    name: str
    glyphs: Mapping[str, np.ndarray]
    gap: int = GAP

    @classmethod
    def from_font(cls, name: str, font: Mapping[str, tuple[str, ...]], scale: int = SCALE, bold: bool = False) -> "GlyphAtlas":
        glyphs = {}
        for ch, rows in font.items():
            bitmap = _crop_columns(_parse(rows))
            if bold:
                bitmap = _embolden(bitmap)
            glyphs[ch] = np.kron(bitmap, np.ones((scale, scale), dtype=bool))
        return cls(name=name, glyphs=glyphs)

    @classmethod
    def regular(cls) -> "GlyphAtlas":
        return cls.from_font("regular", FONT_5X7)

    @classmethod
    def bold(cls) -> "GlyphAtlas":
        return cls.from_font("bold", FONT_5X7, bold=True)

    @property
    def chars(self) -> str:
        return "".join(self.glyphs)

    @property
    def height(self) -> int:
        return next(iter(self.glyphs.values())).shape[0]

    def contains(self, text: str) -> bool:
        return all(ch in self.glyphs for ch in text)

    def text_width(self, text: str) -> int:
        if not text:
            return 0
        return sum(self.glyphs[ch].shape[1] for ch in text) + self.gap * (len(text) - 1)

    def ink_mask(self, text: str) -> np.ndarray:
        """Glyph strip of shape (height, text_width) for text"""
        strip = np.zeros((self.height, self.text_width(text)), dtype=bool)
        x = 0
        for ch in text:
            glyph = self.glyphs[ch]
            strip[:, x:x + glyph.shape[1]] = glyph
            x += glyph.shape[1] + self.gap
        return strip


def get_atlas(name: str) -> GlyphAtlas:
    if name == "regular":
        return GlyphAtlas.regular()
    if name == "bold":
        return GlyphAtlas.bold()
    raise ValueError(f"unknown glyph atlas {name!r} (expected 'regular' or 'bold')")
