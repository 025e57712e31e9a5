"""
Synthetic degraded-word datasets

On-disk layout under a dataset root:

    train.tsv, val.tsv, test.tsv      one manifest per split
    images/<split>/<index>.png        8-bit grayscale PNG crops

Manifest format: `#`-prefixed header lines (`# key=value`), then one record
per line: `relative_image_path<TAB>gt_text`.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

import numpy as np
from PIL import Image, UnidentifiedImageError
from tqdm import tqdm

from ..errors import DatasetError
from ..losses.vocab import DEFAULT_CHARSET, CharVocab
from .degrade import DegradationConfig
from .geometry import pad_to
from .glyphs import GlyphAtlas
from .render import CROP_HEIGHT, CROP_WIDTH, Sample, render_word

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1
SPLITS = ("train", "val", "test")
SPLIT_IDS = {name: i for i, name in enumerate(SPLITS)}
DEFAULT_COUNTS = {"train": 5000, "val": 500, "test": 500}
MAX_WORD_LENGTH = 8

PathLike = Union[str, Path]


# ============================================================================
# Image files
# ============================================================================

def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_png(path: PathLike, image: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(image)).save(path, format="PNG")


def read_png(path: PathLike) -> np.ndarray:
    """Decode a PNG as grayscale float32 in [0, 1]"""
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.float32) / 255.0


# ============================================================================
# Manifest
# ============================================================================

@dataclass
class DatasetManifest:
    """One split of a dataset: header fields plus (image path, text) entries"""
    split: str
    seed: int
    degradation: DegradationConfig
    entries: list[tuple[str, str]]
    root: Path = field(default_factory=Path)
    charset: str = DEFAULT_CHARSET
    atlas: str = "regular"
    version: int = MANIFEST_VERSION

    @property
    def path(self) -> Path:
        return self.root / f"{self.split}.tsv"

    def header(self) -> dict[str, str]:
        return {
            "version": str(self.version),
            "split": self.split,
            "seed": str(self.seed),
            "charset": self.charset,
            "atlas": self.atlas,
            "degradation": json.dumps(self.degradation.model_dump(), sort_keys=True),
        }

    def write(self) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        lines = [f"# {key}={value}" for key, value in self.header().items()]
        lines.extend(f"{rel}\t{text}" for rel, text in self.entries)
        self.path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return self.path

    @classmethod
    def read(cls, path: PathLike) -> "DatasetManifest":
        """
        Parse a manifest file.

        Raises:
            DatasetError: missing file, malformed header or record
        """
        path = Path(path)
        if not path.exists():
            raise DatasetError(f"manifest not found: {path}")
        header: dict[str, str] = {}
        entries: list[tuple[str, str]] = []
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if sep:
                    header[key.strip()] = value
                continue
            rel, sep, text = line.partition("\t")
            if not sep:
                raise DatasetError(f"{path}:{lineno}: expected 'path<TAB>text', got {line!r}")
            entries.append((rel, text))

        try:
            version = int(header.get("version", MANIFEST_VERSION))
            seed = int(header.get("seed", 0))
            degradation = DegradationConfig(**json.loads(header.get("degradation", "{}")))
        except (ValueError, TypeError) as e:
            raise DatasetError(f"{path}: malformed header: {e}") from None
        if version != MANIFEST_VERSION:
            raise DatasetError(f"{path}: unsupported manifest version {version}")

        return cls(
            split=header.get("split", path.stem),
            seed=seed,
            degradation=degradation,
            entries=entries,
            root=path.parent,
            charset=header.get("charset", DEFAULT_CHARSET),
            atlas=header.get("atlas", "regular"),
            version=version,
        )


# ============================================================================
# Word sources
# ============================================================================

def random_word(rng: np.random.Generator, charset: str, max_length: int = MAX_WORD_LENGTH) -> str:
    length = int(rng.integers(1, max_length + 1))
    return "".join(charset[int(i)] for i in rng.integers(0, len(charset), size=length))


def load_word_list(path: PathLike, charset: str, atlas: GlyphAtlas, width: int = CROP_WIDTH) -> list[str]:
    """Upper-cased words from a file, kept if inside the charset and narrow enough"""
    words = []
    for raw in Path(path).read_text(encoding="utf-8").split():
        word = raw.upper()
        if word and all(ch in charset for ch in word) and atlas.text_width(word) <= width:
            words.append(word)
    if not words:
        raise DatasetError(f"word list {path}: no usable words for charset {charset!r}")
    return words


# ============================================================================
# Generation
# ============================================================================

def _sample_seed(seed: int, split: str, index: int) -> list[int]:
    return [seed, SPLIT_IDS[split], index]


def _make_sample(
    split: str,
    index: int,
    seed: int,
    charset: str,
    atlas: GlyphAtlas,
    deg: DegradationConfig,
    words: Optional[Sequence[str]],
) -> Sample:
    rng = np.random.default_rng(_sample_seed(seed, split, index))
    if words:
        text = words[int(rng.integers(0, len(words)))]
    else:
        text = random_word(rng, charset)
    render_seed = [int(s) for s in rng.integers(0, 2**31, size=2)]
    return render_word(text, atlas, deg, render_seed)


def generate_dataset(
    out_dir: PathLike,
    counts: Optional[dict[str, int]] = None,
    deg: Optional[DegradationConfig] = None,
    seed: int = 0,
    charset: str = DEFAULT_CHARSET,
    atlas: Optional[GlyphAtlas] = None,
    word_list: Optional[PathLike] = None,
    workers: int = 1,
    progress: bool = True,
) -> dict[str, DatasetManifest]:
    """
    Render and write every split, then its manifest.

    Each sample draws from its own stream seeded by (seed, split, index), so
    the output does not depend on `workers`.

    Args:
        out_dir: dataset root
        counts: samples per split (default 5000/500/500)
        deg: degradation applied to every sample
        seed: generation seed
        charset: characters words are drawn from
        atlas: glyph atlas (default regular)
        word_list: optional file of words to draw from instead of random strings
        workers: threads rendering in parallel
        progress: show a progress bar per split

    Raises:
        ValueError: a split count below 1 or an unknown split name
        DatasetError: unusable word list
        OSError: output path not writable
    """
    counts = dict(DEFAULT_COUNTS if counts is None else counts)
    for split, count in counts.items():
        if split not in SPLIT_IDS:
            raise ValueError(f"unknown split {split!r} (expected one of {SPLITS})")
        if count < 1:
            raise ValueError(f"split {split!r}: count must be at least 1, got {count}")
    deg = deg or DegradationConfig()
    atlas = atlas or GlyphAtlas.regular()
    words = load_word_list(word_list, charset, atlas) if word_list else None
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)

    manifests = {}
    for split, count in counts.items():
        def build(index: int, split: str = split) -> tuple[str, str]:
            sample = _make_sample(split, index, seed, charset, atlas, deg, words)
            rel = f"images/{split}/{index:06d}.png"
            write_png(root / rel, sample.image)
            return rel, sample.text

        indices = range(count)
        bar = tqdm(total=count, desc=f"generate {split}", disable=not progress)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                entries = []
                for entry in pool.map(build, indices):
                    entries.append(entry)
                    bar.update(1)
        else:
            entries = []
            for index in indices:
                entries.append(build(index))
                bar.update(1)
        bar.close()

        manifest = DatasetManifest(
            split=split, seed=seed, degradation=deg, entries=entries, root=root,
            charset=charset, atlas=atlas.name,
        )
        manifest.write()
        logger.info("Wrote %d %s samples to %s", count, split, manifest.path)
        manifests[split] = manifest
    return manifests


# ============================================================================
# Loading
# ============================================================================

def iter_dataset(
    manifest_path: PathLike,
    shuffle_seed: Optional[int] = None,
    vocab: Optional[CharVocab] = None,
) -> Iterator[Sample]:
    """
    Yield samples in manifest order (or a seeded permutation of it).

    Raises:
        DatasetError: missing/corrupt image or out-of-vocabulary text, naming the entry
    """
    manifest = DatasetManifest.read(manifest_path)
    vocab = vocab or CharVocab.from_chars(manifest.charset)
    order = np.arange(len(manifest.entries))
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(order)

    for i in order:
        rel, text = manifest.entries[int(i)]
        where = f"{manifest.path} entry {int(i)} ({rel})"
        if not vocab.contains(text):
            raise DatasetError(f"{where}: text {text!r} has characters outside the vocabulary")
        path = manifest.root / rel
        if not path.exists():
            raise DatasetError(f"{where}: image file missing")
        try:
            image = read_png(path)
        except (OSError, UnidentifiedImageError) as e:
            raise DatasetError(f"{where}: cannot decode image: {e}") from None
        if image.shape[0] > CROP_HEIGHT or image.shape[1] > CROP_WIDTH:
            raise DatasetError(f"{where}: image {image.shape[1]}x{image.shape[0]} exceeds {CROP_WIDTH}x{CROP_HEIGHT}")
        image = pad_to(image, CROP_WIDTH, CROP_HEIGHT)
        yield Sample(image=image, text=text, degradation=manifest.degradation, path=rel)


def load_dataset(
    manifest_path: PathLike,
    shuffle_seed: Optional[int] = None,
    vocab: Optional[CharVocab] = None,
) -> list[Sample]:
    """All samples of one split, eagerly decoded"""
    return list(iter_dataset(manifest_path, shuffle_seed, vocab))


def split_manifest(root: PathLike, split: str) -> Path:
    """Path of a split's manifest under a dataset root (a manifest path passes through)"""
    root = Path(root)
    if root.suffix == ".tsv":
        return root
    return root / f"{split}.tsv"
