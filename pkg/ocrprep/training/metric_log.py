"""
Per-epoch metric log

Tab-separated text, one header line then one record per (epoch, split):

    epoch  split  loss_total  loss_approx  loss_ctc  loss_lev  loss_mse  word_accuracy  cer

Losses are means over the epoch's images. loss_approx is the approximator's
CTC against recognizer output (surrogate training); loss_lev is the mean
Levenshtein loss of the perturbed samples (SFE training). Accuracy and CER
are percentages measured with the unknown-box recognizer. Absent values are
written as `-`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional, Union

PathLike = Union[str, Path]
MISSING = "-"


@dataclass
class MetricRecord:
    epoch: int
    split: str
    loss_total: Optional[float] = None
    loss_approx: Optional[float] = None
    loss_ctc: Optional[float] = None
    loss_lev: Optional[float] = None
    loss_mse: Optional[float] = None
    word_accuracy: Optional[float] = None
    cer: Optional[float] = None


COLUMNS = [f.name for f in fields(MetricRecord)]


def _format(value: object) -> str:
    if value is None:
        return MISSING
    if isinstance(value, float):
        return MISSING if math.isnan(value) else f"{value:.6f}"
    return str(value)


def _parse(name: str, text: str) -> object:
    if text == MISSING:
        return None
    if name == "epoch":
        return int(text)
    if name == "split":
        return text
    return float(text)


class MetricLog:
    """In-memory list of records, mirrored to a file when a path is given"""

    def __init__(self, path: Optional[PathLike] = None):
        self.path = Path(path) if path is not None else None
        self.records: list[MetricRecord] = []
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("\t".join(COLUMNS) + "\n", encoding="utf-8")

    def append(self, record: MetricRecord) -> None:
        self.records.append(record)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as f:
                f.write(self.format_record(record) + "\n")

    @staticmethod
    def format_record(record: MetricRecord) -> str:
        values = asdict(record)
        return "\t".join(_format(values[c]) for c in COLUMNS)

    def to_text(self) -> str:
        lines = ["\t".join(COLUMNS)] + [self.format_record(r) for r in self.records]
        return "\n".join(lines) + "\n"

    def last(self, split: str) -> Optional[MetricRecord]:
        for record in reversed(self.records):
            if record.split == split:
                return record
        return None

    @classmethod
    def read(cls, path: PathLike) -> "MetricLog":
        log = cls()
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        header = lines[0].split("\t")
        for line in lines[1:]:
            if line:
                cells = dict(zip(header, line.split("\t")))
                log.records.append(MetricRecord(**{c: _parse(c, cells[c]) for c in COLUMNS}))
        return log
