"""
Run manifest: everything needed to repeat a run

Written as JSON next to the checkpoints and reports of every training and
evaluation command.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Union

from .. import __version__

PathLike = Union[str, Path]

STANDARD_NOTES = [
    "networks receive raw [0, 1] pixels (no mean/std normalization)",
    "images passed to recognizers and the approximator are clamped to [0, 1] after noise",
    "aggregate CER is the unweighted mean of per-sample CER",
]


@dataclass
class RunManifest:
    """Config snapshot, seeds, checkpoint digests and code version of one command"""
    command: list[str]
    config: dict[str, Any]
    seeds: dict[str, int] = field(default_factory=dict)
    checkpoints: dict[str, str] = field(default_factory=dict)  # path -> sha256
    outputs: dict[str, str] = field(default_factory=dict)
    code_version: str = __version__
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    notes: list[str] = field(default_factory=lambda: list(STANDARD_NOTES))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunManifest":
        return cls(**data)

    def save(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: PathLike) -> "RunManifest":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
