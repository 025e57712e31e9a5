"""
Recognizer construction from the `recognizer` config section
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from .base import Recognizer
from .external import ExternalRecognizer
from .templates import engine_a, engine_b

if TYPE_CHECKING:
    from ..config import RecognizerConfig

ENGINES = ("template-a", "template-b", "external")


def build_recognizer(cfg: "RecognizerConfig", engine: str = "") -> Recognizer:
    """
    Instantiate the configured engine (or `engine`, when given).

    Raises:
        ValueError: unknown engine, or external engine without a command
    """
    engine = engine or cfg.engine
    if engine == "template-a":
        return engine_a(cfg.tau)
    if engine == "template-b":
        return engine_b(cfg.tau)
    if engine == "external":
        if not cfg.command:
            raise ValueError("recognizer.command is empty; set it or OCRPREP_OCR_COMMAND")
        return ExternalRecognizer(cfg.command, timeout=cfg.timeout, max_concurrency=cfg.max_concurrency)
    raise ValueError(f"unknown recognizer engine {engine!r} (expected one of {ENGINES})")
