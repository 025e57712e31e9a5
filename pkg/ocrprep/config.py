"""
Run configuration

A YAML file holds one mapping per section; every key has a default, so an
empty file (or none) is a valid configuration. Command-line overrides use
`section.key=value` with the value parsed as YAML. Validation happens before
any work starts and reports the offending dotted key.

Example:

    nn:
      S: 2
      sigma_set: [0.0, 0.01, 0.02, 0.03, 0.04, 0.05]
    recognizer:
      engine: template-a
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Literal, Optional, Sequence, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .data.degrade import DegradationConfig
from .errors import ConfigError
from .losses.vocab import DEFAULT_CHARSET
from .recognizers.external import COMMAND_ENV
from .training.config import NNTrainConfig, PretrainConfig, SFETrainConfig

PathLike = Union[str, Path]


class DataConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    root: str = "datasets/desk"
    train: int = Field(default=5000, ge=1)
    val: int = Field(default=500, ge=1)
    test: int = Field(default=500, ge=1)
    seed: int = 0
    charset: str = Field(default=DEFAULT_CHARSET, min_length=1)
    atlas: Literal["regular", "bold"] = "regular"
    word_list: Optional[str] = None
    workers: int = Field(default=1, ge=1)

    def counts(self) -> dict[str, int]:
        return {"train": self.train, "val": self.val, "test": self.test}


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pre_widths: tuple[int, int, int] = (16, 32, 64)
    approx_widths: tuple[int, int, int] = (16, 32, 64)
    hidden: int = Field(default=64, ge=1)
    bidirectional: bool = True
    unknown_char: bool = True
    seed: int = 0


class RecognizerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    engine: Literal["template-a", "template-b", "external"] = "template-a"
    tau: float = Field(default=0.6, ge=0.0, le=1.0)
    command: str = ""
    timeout: float = Field(default=30.0, gt=0.0)
    max_concurrency: int = Field(default=1, ge=1)


class EvalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    split: Literal["train", "val", "test"] = "test"
    export_count: int = Field(default=10, ge=1)


class RunConfig(BaseModel):
    """Every section of a run"""
    model_config = ConfigDict(extra="forbid")

    out_dir: str = "runs"
    progress: bool = True
    data: DataConfig = Field(default_factory=DataConfig)
    degradation: DegradationConfig = Field(default_factory=DegradationConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    pretrain: PretrainConfig = Field(default_factory=PretrainConfig)
    nn: NNTrainConfig = Field(default_factory=NNTrainConfig)
    sfe: SFETrainConfig = Field(default_factory=SFETrainConfig)
    recognizer: RecognizerConfig = Field(default_factory=RecognizerConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)

    def snapshot(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


def _apply_override(raw: dict[str, Any], override: str) -> None:
    key, sep, value = override.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"override {override!r} is not of the form section.key=value")
    parts = key.split(".")
    node = raw
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"{key}: {part!r} is not a section")
        node = child
    try:
        node[parts[-1]] = yaml.safe_load(value)
    except yaml.YAMLError as e:
        raise ConfigError(f"{key}: cannot parse value {value!r}: {e}") from None


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    key = ".".join(str(part) for part in err["loc"])
    return f"{key}: {err['msg']}"


def validate_config(raw: dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(_first_error(e)) from None


def load_config(path: Optional[PathLike] = None, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Read, override and validate a run configuration.

    Args:
        path: YAML file, or None for defaults
        overrides: `section.key=value` strings applied in order

    Raises:
        ConfigError: unreadable file or any invalid key/value (message names the key)
    """
    raw: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from None
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping of sections")
        raw = loaded or {}

    for override in overrides:
        _apply_override(raw, override)

    env_command = os.environ.get(COMMAND_ENV)
    if env_command:
        raw.setdefault("recognizer", {})
        if isinstance(raw["recognizer"], dict):
            raw["recognizer"]["command"] = env_command

    return validate_config(raw)


def dump_config(cfg: RunConfig, path: PathLike) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.snapshot(), sort_keys=False), encoding="utf-8")
