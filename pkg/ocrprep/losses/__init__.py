"""
Loss functions and text metrics
"""

from .vocab import CharVocab, DEFAULT_CHARSET, UNKNOWN_CHAR, BLANK_INDEX
from .ctc import ctc_loss, ctc_forward_backward, is_feasible, min_steps
from .image import mse_to_white, composite_loss, composite_terms, CompositeLoss
from .text_metrics import levenshtein, cer, word_accuracy

__all__ = [
    "CharVocab",
    "DEFAULT_CHARSET",
    "UNKNOWN_CHAR",
    "BLANK_INDEX",
    "ctc_loss",
    "ctc_forward_backward",
    "is_feasible",
    "min_steps",
    "mse_to_white",
    "composite_loss",
    "composite_terms",
    "CompositeLoss",
    "levenshtein",
    "cer",
    "word_accuracy",
]
