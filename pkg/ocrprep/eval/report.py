"""
Metric reports, paired comparisons and printed tables

Sign conventions: gain = treated accuracy - baseline accuracy; CER reduction =
baseline CER - treated CER. Both may be negative. Printed numbers use two
decimals with round-half-even; TSV files keep full precision.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Optional, Sequence, Union

PathLike = Union[str, Path]

CER_CONVENTION = "CER = unweighted mean of per-sample CER (%)"
NO_PREPROCESSOR = "none"


def round2(value: float) -> Decimal:
    """Two decimals, round-half-even, from the shortest repr of the float"""
    return Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN)


def fmt2(value: float) -> str:
    return str(round2(value))


@dataclass
class MetricsReport:
    """Aggregate accuracy and CER of one (dataset, recognizer, preprocessor) triple"""
    dataset_id: str
    recognizer_id: str
    preprocessor_id: str
    word_accuracy: float
    cer: float
    n_samples: int
    n_errors: int = 0
    trained_with: str = ""

    def to_tsv(self) -> str:
        names = [f.name for f in fields(self)]
        values = asdict(self)
        cells = [repr(values[n]) if isinstance(values[n], float) else str(values[n]) for n in names]
        return "\t".join(names) + "\n" + "\t".join(cells) + "\n"

    def save(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_tsv(), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: PathLike) -> "MetricsReport":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if len(lines) < 2:
            raise ValueError(f"{path}: expected a header line and a value line")
        row = dict(zip(lines[0].split("\t"), lines[1].split("\t")))
        return cls(
            dataset_id=row["dataset_id"],
            recognizer_id=row["recognizer_id"],
            preprocessor_id=row["preprocessor_id"],
            word_accuracy=float(row["word_accuracy"]),
            cer=float(row["cer"]),
            n_samples=int(row["n_samples"]),
            n_errors=int(row.get("n_errors", 0)),
            trained_with=row.get("trained_with", ""),
        )


@dataclass
class PairedReport:
    """Baseline vs treated on the same dataset and recognizer"""
    baseline: MetricsReport
    treated: MetricsReport
    gain: float
    cer_reduction: float

    def to_tsv(self) -> str:
        header = [
            "dataset_id", "recognizer_id", "preprocessor_id",
            "acc_before", "acc_after", "gain", "cer_before", "cer_after", "cer_reduction",
        ]
        row = [
            self.baseline.dataset_id, self.baseline.recognizer_id, self.treated.preprocessor_id,
            repr(self.baseline.word_accuracy), repr(self.treated.word_accuracy), repr(self.gain),
            repr(self.baseline.cer), repr(self.treated.cer), repr(self.cer_reduction),
        ]
        return "\t".join(header) + "\n" + "\t".join(row) + "\n"


def compare(baseline: MetricsReport, treated: MetricsReport) -> PairedReport:
    """
    Pair two reports.

    Raises:
        ValueError: the reports are for different datasets or recognizers
    """
    if baseline.dataset_id != treated.dataset_id:
        raise ValueError(f"compare: dataset ids differ ({baseline.dataset_id!r} vs {treated.dataset_id!r})")
    if baseline.recognizer_id != treated.recognizer_id:
        raise ValueError(
            f"compare: recognizer ids differ ({baseline.recognizer_id!r} vs {treated.recognizer_id!r})"
        )
    return PairedReport(
        baseline=baseline,
        treated=treated,
        gain=treated.word_accuracy - baseline.word_accuracy,
        cer_reduction=baseline.cer - treated.cer,
    )


# ============================================================================
# Tables
# ============================================================================

def _table(title: str, header: Sequence[str], rows: Sequence[Sequence[str]], width: int = 100) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["=" * width, title, "=" * width]
    lines.append("  ".join(h.rjust(w) if i else h.ljust(w) for i, (h, w) in enumerate(zip(header, widths))))
    lines.append("-" * width)
    for row in rows:
        lines.append("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))))
    lines.append("=" * width)
    lines.append(CER_CONVENTION)
    return "\n".join(lines)


def report_table(reports: Sequence[MetricsReport]) -> str:
    header = ["Dataset", "OCR", "Preprocessor", "Accuracy", "CER", "Samples", "Errors"]
    rows = [
        [r.dataset_id, r.recognizer_id, r.preprocessor_id, fmt2(r.word_accuracy), fmt2(r.cer),
         str(r.n_samples), str(r.n_errors)]
        for r in reports
    ]
    return _table("RECOGNITION METRICS", header, rows)


def before_after_table(pairs: Sequence[PairedReport]) -> str:
    """Accuracy and CER before and after preprocessing, with gain and CER reduction"""
    header = ["Dataset", "OCR", "Acc before", "Acc after", "Gain", "CER before", "CER after", "CER reduction"]
    rows = []
    for p in pairs:
        marker = " ✓" if p.gain > 0 else (" ✗" if p.gain < 0 else "")
        rows.append([
            p.baseline.dataset_id, p.baseline.recognizer_id,
            fmt2(p.baseline.word_accuracy), fmt2(p.treated.word_accuracy), fmt2(p.gain) + marker,
            fmt2(p.baseline.cer), fmt2(p.treated.cer), fmt2(p.cer_reduction),
        ])
    return _table("ACCURACY AND CER BEFORE AND AFTER PREPROCESSING", header, rows)


def nn_vs_sfe_table(rows_in: Sequence[tuple[MetricsReport, MetricsReport, MetricsReport]]) -> str:
    """(baseline, surrogate-trained, SFE-trained) triples per dataset/recognizer"""
    header = ["Dataset", "OCR", "Baseline acc", "NN acc", "SFE acc", "Baseline CER", "NN CER", "SFE CER"]
    rows = [
        [b.dataset_id, b.recognizer_id,
         fmt2(b.word_accuracy), fmt2(nn.word_accuracy), fmt2(sfe.word_accuracy),
         fmt2(b.cer), fmt2(nn.cer), fmt2(sfe.cer)]
        for b, nn, sfe in rows_in
    ]
    return _table("NN APPROXIMATION VS SFE PREPROCESSORS", header, rows)


def cross_engine_table(reports: Sequence[MetricsReport], baselines: Optional[dict[str, MetricsReport]] = None) -> str:
    """Accuracy when the preprocessor was trained with one engine and tested with another"""
    baselines = baselines or {}
    header = ["Trained with", "Tested with", "Accuracy", "CER", "Baseline acc"]
    rows = []
    for r in reports:
        base = baselines.get(r.recognizer_id)
        rows.append([
            r.trained_with or "?", r.recognizer_id, fmt2(r.word_accuracy), fmt2(r.cer),
            fmt2(base.word_accuracy) if base else "-",
        ])
    return _table("TRAINED AND TESTED WITH DIFFERENT ENGINES", header, rows)
