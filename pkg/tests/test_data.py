"""
Tests for synthetic data generation

Tests cover:
- Glyph atlases and word rendering
- Undegraded renderings read exactly by the template engines
- Degradations
- Crop geometry
- Dataset generation, manifests and loading
"""

import numpy as np
import pytest
from pydantic import ValidationError

from ocrprep.data import (
    CROP_HEIGHT,
    CROP_WIDTH,
    DatasetManifest,
    DegradationConfig,
    GlyphAtlas,
    clean_word,
    crop_to,
    degrade,
    generate_dataset,
    get_atlas,
    iter_dataset,
    load_dataset,
    load_word_list,
    pad_to,
    read_png,
    render_word,
    split_manifest,
    write_png,
)
from ocrprep.errors import DatasetError, ShapeError
from ocrprep.recognizers import engine_a, engine_b

NOISY = DegradationConfig(noise_sigma=0.2, blur_radius=0.8, clutter_density=0.05, contrast=0.7, dot_dropout=0.05)
SMALL_COUNTS = {"train": 100, "val": 10, "test": 10}


class TestGlyphs:
    """Embedded bitmap font"""

    def test_every_glyph_column_inked(self):
        """Blank-column segmentation never splits a glyph"""
        for atlas in (GlyphAtlas.regular(), GlyphAtlas.bold()):
            for ch, glyph in atlas.glyphs.items():
                assert glyph.any(axis=0).all(), f"{atlas.name} {ch}"

    def test_eight_widest_glyphs_fit(self):
        """Eight of the widest characters fit a 128 px crop"""
        for atlas in (GlyphAtlas.regular(), GlyphAtlas.bold()):
            assert atlas.text_width("WWWWWWWW") <= CROP_WIDTH

    def test_bold_is_taller(self):
        """Bold glyphs grow one font row"""
        assert GlyphAtlas.bold().height == GlyphAtlas.regular().height + 3

    def test_unknown_atlas(self):
        """Only regular and bold exist"""
        with pytest.raises(ValueError):
            get_atlas("italic")


class TestRendering:
    """Word rendering"""

    def test_clean_word_is_binary(self):
        """Level-0 rendering has only black and white pixels"""
        image = clean_word("CAT", GlyphAtlas.regular())
        assert image.shape == (CROP_HEIGHT, CROP_WIDTH)
        assert set(np.unique(image)) <= {0.0, 1.0}

    def test_empty_text_is_background(self):
        """No text, all white"""
        sample = render_word("", GlyphAtlas.regular(), DegradationConfig(), seed=0)
        assert (sample.image == 1.0).all()

    def test_deterministic(self):
        """Same text, atlas, degradation and seed give identical pixels"""
        a = render_word("HELLO", GlyphAtlas.regular(), NOISY, seed=[1, 2])
        b = render_word("HELLO", GlyphAtlas.regular(), NOISY, seed=[1, 2])
        np.testing.assert_array_equal(a.image, b.image)

    def test_seed_changes_degradation(self):
        """Different seeds give different degraded images"""
        a = render_word("HELLO", GlyphAtlas.regular(), NOISY, seed=1)
        b = render_word("HELLO", GlyphAtlas.regular(), NOISY, seed=2)
        assert not np.array_equal(a.image, b.image)

    def test_unknown_character_rejected(self):
        """Characters outside the atlas are rejected"""
        with pytest.raises(ValueError):
            clean_word("cat", GlyphAtlas.regular())

    def test_level_zero_read_exactly(self):
        """Undegraded renderings, also after the PNG round trip, are read exactly by both template engines"""
        recognizers = [engine_a(), engine_b()]
        for i, word in enumerate(["CAT", "QUIZ", "RECEIPT", "2024", "XYZ0", "M"]):
            sample = render_word(word, GlyphAtlas.regular(), DegradationConfig(), seed=i)
            for recognizer in recognizers:
                assert recognizer.recognize(sample.image) == word

    def test_level_zero_dataset_read_exactly(self, tmp_path):
        """Every sample of a degradation-free dataset on disk reads back as its label"""
        generate_dataset(tmp_path, {"train": 1, "val": 1, "test": 30}, DegradationConfig(), seed=5, progress=False)
        recognizer = engine_a()
        for sample in load_dataset(split_manifest(tmp_path, "test")):
            assert recognizer.recognize(sample.image) == sample.text

    def test_overlong_word_rejected(self):
        """Words wider than the crop are rejected"""
        with pytest.raises(ValueError):
            clean_word("WWWWWWWWW", GlyphAtlas.regular())


class TestDegradation:
    """Degradation pipeline"""

    def test_identity_config(self):
        """Default config leaves a clean image unchanged"""
        image = clean_word("AB", GlyphAtlas.regular())
        out = degrade(image, DegradationConfig(), np.random.default_rng(0))
        np.testing.assert_array_equal(out, image)
        assert DegradationConfig().is_identity()

    def test_contrast_lightens_ink(self):
        """Contrast 0.6 maps black ink to 0.4"""
        image = clean_word("A", GlyphAtlas.regular())
        out = degrade(image, DegradationConfig(contrast=0.6), np.random.default_rng(0))
        assert out.min() == pytest.approx(0.4)
        assert out.max() == pytest.approx(1.0)

    def test_output_clamped(self):
        """Heavy noise stays inside [0, 1]"""
        image = clean_word("AB", GlyphAtlas.regular())
        out = degrade(image, DegradationConfig(noise_sigma=1.0), np.random.default_rng(0))
        assert out.min() >= 0.0 and out.max() <= 1.0
        assert out.dtype == np.float32

    def test_rejects_out_of_range(self):
        """Negative noise and unknown keys are invalid"""
        with pytest.raises(ValidationError):
            DegradationConfig(noise_sigma=-0.1)
        with pytest.raises(ValidationError):
            DegradationConfig(speckle=0.1)

    def test_with_noise(self):
        """with_noise replaces only the noise level"""
        cfg = NOISY.with_noise(0.4)
        assert cfg.noise_sigma == 0.4
        assert cfg.blur_radius == NOISY.blur_radius


class TestGeometry:
    """pad_to / crop_to"""

    def test_pad_appends_white_columns(self):
        """100x32 becomes 128x32 with 28 white columns on the right"""
        image = np.zeros((32, 100), dtype=np.float32)
        padded = pad_to(image, 128, 32)
        assert padded.shape == (32, 128)
        assert (padded[:, :100] == 0.0).all()
        assert (padded[:, 100:] == 1.0).all()

    def test_target_size_unchanged(self):
        """Already target-sized input is returned as is"""
        image = np.random.default_rng(0).uniform(size=(32, 128)).astype(np.float32)
        np.testing.assert_array_equal(pad_to(image, 128, 32), image)

    def test_crop_inverts_pad(self):
        """Cropping back recovers the original"""
        image = np.random.default_rng(1).uniform(size=(21, 57)).astype(np.float32)
        np.testing.assert_array_equal(crop_to(pad_to(image, 128, 32), 57, 21), image)

    def test_larger_than_target(self):
        """Images larger than the target are rejected"""
        with pytest.raises(ShapeError):
            pad_to(np.ones((40, 128)), 128, 32)


class TestDataset:
    """Generation, manifests and loading"""

    def test_counts_and_disjoint_splits(self, tmp_path):
        """100/10/10 gives 120 entries with distinct files"""
        manifests = generate_dataset(tmp_path, SMALL_COUNTS, NOISY, seed=3, progress=False)
        entries = [rel for m in manifests.values() for rel, _ in m.entries]
        assert len(entries) == 120
        assert len(set(entries)) == 120
        assert {split: len(m.entries) for split, m in manifests.items()} == SMALL_COUNTS

    def test_same_seed_same_bytes(self, tmp_path):
        """Two runs with one seed write identical manifests and images"""
        counts = {"train": 5, "val": 2, "test": 2}
        generate_dataset(tmp_path / "a", counts, NOISY, seed=7, progress=False)
        generate_dataset(tmp_path / "b", counts, NOISY, seed=7, workers=3, progress=False)
        for split in counts:
            assert (tmp_path / "a" / f"{split}.tsv").read_bytes() == (tmp_path / "b" / f"{split}.tsv").read_bytes()
        for path in (tmp_path / "a" / "images").rglob("*.png"):
            twin = tmp_path / "b" / path.relative_to(tmp_path / "a")
            assert path.read_bytes() == twin.read_bytes()

    def test_load_matches_manifest(self, tmp_path):
        """Loaded samples follow manifest order with [0, 1] pixels"""
        generate_dataset(tmp_path, {"train": 6}, NOISY, seed=1, progress=False)
        manifest = DatasetManifest.read(split_manifest(tmp_path, "train"))
        samples = load_dataset(manifest.path)
        assert [s.text for s in samples] == [text for _, text in manifest.entries]
        for sample in samples:
            assert sample.image.shape == (CROP_HEIGHT, CROP_WIDTH)
            assert 0.0 <= sample.image.min() and sample.image.max() <= 1.0
        assert manifest.degradation == NOISY

    def test_png_round_trip_quantization(self, tmp_path):
        """Writing and reading back loses at most half a gray level"""
        image = np.random.default_rng(2).uniform(size=(32, 128)).astype(np.float32)
        write_png(tmp_path / "x.png", image)
        assert np.abs(read_png(tmp_path / "x.png") - image).max() <= 0.5 / 255 + 1e-6

    def test_shuffle_is_permutation(self, tmp_path):
        """Seeded shuffling permutes manifest order"""
        generate_dataset(tmp_path, {"train": 8}, DegradationConfig(), seed=0, progress=False)
        path = split_manifest(tmp_path, "train")
        ordered = [s.path for s in iter_dataset(path)]
        shuffled = [s.path for s in iter_dataset(path, shuffle_seed=5)]
        assert sorted(shuffled) == sorted(ordered)
        assert [s.path for s in iter_dataset(path, shuffle_seed=5)] == shuffled

    def test_missing_image_names_entry(self, tmp_path):
        """A manifest entry pointing at a missing file fails at that entry"""
        manifests = generate_dataset(tmp_path, {"train": 3}, DegradationConfig(), seed=0, progress=False)
        rel, _ = manifests["train"].entries[1]
        (tmp_path / rel).unlink()
        with pytest.raises(DatasetError, match="entry 1"):
            load_dataset(manifests["train"].path)

    def test_corrupt_image(self, tmp_path):
        """Undecodable image bytes are a DatasetError"""
        manifests = generate_dataset(tmp_path, {"train": 2}, DegradationConfig(), seed=0, progress=False)
        rel, _ = manifests["train"].entries[0]
        (tmp_path / rel).write_bytes(b"not a png")
        with pytest.raises(DatasetError, match="entry 0"):
            load_dataset(manifests["train"].path)

    def test_out_of_vocabulary_text(self, tmp_path):
        """Lowercase ground truth is outside the vocabulary"""
        manifests = generate_dataset(tmp_path, {"train": 1}, DegradationConfig(), seed=0, progress=False)
        manifest = manifests["train"]
        manifest.entries = [(manifest.entries[0][0], "abc")]
        manifest.write()
        with pytest.raises(DatasetError):
            load_dataset(manifest.path)

    def test_missing_manifest(self, tmp_path):
        """Reading an absent manifest is a DatasetError"""
        with pytest.raises(DatasetError):
            DatasetManifest.read(tmp_path / "train.tsv")

    def test_invalid_counts(self, tmp_path):
        """Zero samples or unknown split names are rejected"""
        with pytest.raises(ValueError):
            generate_dataset(tmp_path, {"train": 0}, progress=False)
        with pytest.raises(ValueError):
            generate_dataset(tmp_path, {"dev": 3}, progress=False)

    def test_word_list(self, tmp_path):
        """Words are upper-cased and filtered to the charset and crop width"""
        path = tmp_path / "words.txt"
        path.write_text("cat dog ça WWWWWWWWW tree\n", encoding="utf-8")
        words = load_word_list(path, "ABCDEFGHIJKLMNOPQRSTUVWXYZ", GlyphAtlas.regular())
        assert words == ["CAT", "DOG", "TREE"]

        generate_dataset(tmp_path / "ds", {"train": 5}, seed=0, word_list=path, progress=False)
        texts = [s.text for s in load_dataset(split_manifest(tmp_path / "ds", "train"))]
        assert set(texts) <= {"CAT", "DOG", "TREE"}
