"""
Unknown-box recognizers: the contract, a template matcher, and an external-process adapter
"""

from .base import (
    Recognizer,
    RecognizerCapabilities,
    RecognitionResult,
    prepare_image,
    recognize_many,
    failures,
    text_or_none,
)
from .templates import (
    GlyphTemplateSet,
    TemplateRecognizer,
    template_recognize,
    segment_columns,
    thicken_strokes,
    engine_a,
    engine_b,
    DEFAULT_TAU,
)
from .external import ExternalRecognizer, COMMAND_ENV, PLACEHOLDER
from .factory import build_recognizer, ENGINES

__all__ = [
    "Recognizer",
    "RecognizerCapabilities",
    "RecognitionResult",
    "prepare_image",
    "recognize_many",
    "failures",
    "text_or_none",
    "GlyphTemplateSet",
    "TemplateRecognizer",
    "template_recognize",
    "segment_columns",
    "thicken_strokes",
    "engine_a",
    "engine_b",
    "DEFAULT_TAU",
    "ExternalRecognizer",
    "COMMAND_ENV",
    "PLACEHOLDER",
    "build_recognizer",
    "ENGINES",
]
