"""
Tests for evaluation and reporting

Tests cover:
- Accuracy and CER aggregation with stub recognizers
- Recognition errors excluded from the denominators
- Paired comparisons, rounding and printed tables
- Cross-engine runs and side-by-side image export
"""

import numpy as np
import pytest

from ocrprep.data import DegradationConfig, GlyphAtlas, read_png, render_word
from ocrprep.errors import RecognitionError
from ocrprep.eval import (
    NO_PREPROCESSOR,
    MetricsReport,
    before_after_table,
    compare,
    cross_engine_eval,
    cross_engine_table,
    evaluate,
    export_images,
    fmt2,
    nn_vs_sfe_table,
    report_table,
    round2,
)
from ocrprep.models import PreprocessorNet
from ocrprep.recognizers import RecognizerCapabilities, engine_a

WORDS = ["CAT", "DOG", "HELLO", "BOX", "MILK", "TOTAL"]
CAPS = RecognizerCapabilities(concurrent_calls_safe=False, max_image_size=(32, 128), deterministic=True)


class LookupRecognizer:
    """Reads back the ground truth it was given, by image content"""

    capabilities = CAPS

    def __init__(self, samples, name="lookup", fail=()):
        self.name = name
        self.table = {s.image.tobytes(): s.text for s in samples}
        self.fail = set(fail)

    def recognize(self, image):
        text = self.table[np.asarray(image, dtype=np.float32).tobytes()]
        if text in self.fail:
            raise RecognitionError(f"refused {text}")
        return text


class ConstantRecognizer:
    capabilities = CAPS

    def __init__(self, text="", name="constant"):
        self.text = text
        self.name = name

    def recognize(self, image):
        return self.text


def dataset(words=WORDS):
    deg = DegradationConfig(noise_sigma=0.1)
    return [render_word(w, GlyphAtlas.regular(), deg, seed=i) for i, w in enumerate(words)]


def report(acc, cer, dataset_id="desk/test", recognizer_id="template-a", preprocessor_id="none"):
    return MetricsReport(dataset_id, recognizer_id, preprocessor_id, acc, cer, n_samples=100)


class TestEvaluate:
    """Metric aggregation"""

    def test_perfect_recognizer(self):
        """Echoing the ground truth gives 100 % accuracy and 0 CER"""
        samples = dataset()
        result = evaluate(LookupRecognizer(samples), None, samples, "desk/test")
        assert result.word_accuracy == 100.0
        assert result.cer == 0.0
        assert result.preprocessor_id == NO_PREPROCESSOR
        assert result.n_samples == len(samples)

    def test_empty_recognizer(self):
        """Empty output gives 0 % accuracy and 100 CER"""
        result = evaluate(ConstantRecognizer(""), None, dataset())
        assert result.word_accuracy == 0.0
        assert result.cer == 100.0

    def test_mean_per_sample_cer(self):
        """CER is the unweighted mean of per-sample CER"""
        samples = dataset(["AB", "ABCD"])
        result = evaluate(ConstantRecognizer("AB"), None, samples)
        assert result.word_accuracy == 50.0
        assert result.cer == pytest.approx(25.0)

    def test_errors_excluded(self):
        """Failed recognitions count separately and leave the denominators"""
        samples = dataset()
        result = evaluate(LookupRecognizer(samples, fail={"DOG", "BOX"}), None, samples)
        assert result.n_errors == 2
        assert result.word_accuracy == 100.0
        assert result.n_samples == len(samples)

    def test_order_independent(self):
        """Shuffling samples leaves the report unchanged"""
        samples = dataset()
        recognizer = engine_a()
        shuffled = [samples[i] for i in np.random.default_rng(0).permutation(len(samples))]
        assert evaluate(recognizer, None, samples) == evaluate(recognizer, None, shuffled)

    def test_empty_dataset(self):
        """Nothing to evaluate is an error"""
        with pytest.raises(ValueError):
            evaluate(ConstantRecognizer(), None, [])

    def test_preprocessor_applied(self):
        """With a preprocessor the recognizer sees its output"""
        samples = dataset()
        result = evaluate(ConstantRecognizer("CAT"), PreprocessorNet(widths=(2, 4, 4)), samples, preprocessor_id="pre.ckpt")
        assert result.preprocessor_id == "pre.ckpt"
        assert result.word_accuracy == pytest.approx(100.0 / len(samples))

    def test_identity_preprocessor_matches_baseline(self):
        """A preprocessor that passes images through scores exactly like no preprocessor"""
        samples = dataset()
        recognizer = engine_a()
        baseline = evaluate(recognizer, None, samples, "desk/test")
        treated = evaluate(recognizer, IdentityPreprocessor(widths=(2, 4, 4)), samples, "desk/test", preprocessor_id="identity")
        assert treated.word_accuracy == baseline.word_accuracy
        assert treated.cer == baseline.cer
        assert treated.n_errors == baseline.n_errors == 0
        assert treated.preprocessor_id == "identity"


class IdentityPreprocessor(PreprocessorNet):
    """Returns its input unchanged"""

    def forward(self, x):
        return x


class TestReports:
    """Comparisons, persistence and tables"""

    def test_compare_example(self):
        """54.51/26.33 before and 83.36/8.68 after"""
        paired = compare(report(54.51, 26.33), report(83.36, 8.68, preprocessor_id="nn"))
        assert fmt2(paired.gain) == "28.85"
        assert fmt2(paired.cer_reduction) == "17.65"

    def test_negative_gain_kept(self):
        """A worse preprocessor reports a negative gain"""
        paired = compare(report(60.0, 10.0), report(55.0, 12.0))
        assert paired.gain == pytest.approx(-5.0)
        assert paired.cer_reduction == pytest.approx(-2.0)
        assert "✗" in before_after_table([paired])

    def test_mismatched_ids_rejected(self):
        """Reports for different datasets or recognizers do not pair"""
        with pytest.raises(ValueError):
            compare(report(1.0, 1.0), report(1.0, 1.0, dataset_id="other/test"))
        with pytest.raises(ValueError):
            compare(report(1.0, 1.0), report(1.0, 1.0, recognizer_id="template-b"))

    def test_round_half_even(self):
        """Ties round to the even digit"""
        assert str(round2(0.125)) == "0.12"
        assert str(round2(0.375)) == "0.38"
        assert fmt2(100.0) == "100.00"

    def test_tsv_round_trip(self, tmp_path):
        """Saved reports load back exactly"""
        original = MetricsReport("desk/test", "template-b", "nn.ckpt", 1 / 3, 2 / 3, 500, 3, "template-a")
        assert MetricsReport.load(original.save(tmp_path / "report.tsv")) == original

    def test_tables_mention_every_row(self):
        """Printed tables carry the ids and the CER convention"""
        base, nn, sfe = report(50.0, 20.0), report(80.0, 9.0, preprocessor_id="nn"), report(70.0, 12.0, preprocessor_id="sfe")
        assert "template-a" in report_table([base, nn])
        assert "80.00" in nn_vs_sfe_table([(base, nn, sfe)])
        text = before_after_table([compare(base, nn)])
        assert "30.00 ✓" in text
        assert "unweighted mean" in text
        cross = report(65.0, 14.0, recognizer_id="template-b")
        cross.trained_with = "template-a"
        table = cross_engine_table([cross], {"template-b": report(40.0, 30.0, recognizer_id="template-b")})
        assert "40.00" in table and "template-a" in table


class TestCrossEngineAndExport:
    """Cross-engine evaluation and image export"""

    def test_cross_engine_records_training_engine(self):
        """The training engine is carried in the report"""
        samples = dataset()
        result = cross_engine_eval(PreprocessorNet(widths=(2, 4, 4)), "template-a", ConstantRecognizer("", name="template-b"), samples)
        assert result.trained_with == "template-a"
        assert result.recognizer_id == "template-b"

    def test_export_side_by_side(self, tmp_path):
        """Each file holds input, separator and output"""
        samples = dataset()
        paths = export_images(PreprocessorNet(widths=(2, 4, 4)), samples, tmp_path, count=3)
        assert [p.name for p in paths] == ["0000_CAT.png", "0001_DOG.png", "0002_HELLO.png"]
        image = read_png(paths[0])
        assert image.shape == (32, 2 * 128 + 4)
        np.testing.assert_allclose(image[:, :128], samples[0].image, atol=0.5 / 255 + 1e-6)

    def test_export_count_too_large(self, tmp_path):
        """Asking for more pairs than samples is an error"""
        with pytest.raises(ValueError):
            export_images(PreprocessorNet(widths=(2, 4, 4)), dataset(["CAT"]), tmp_path, count=2)
