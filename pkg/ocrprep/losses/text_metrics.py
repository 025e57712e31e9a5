"""
Text metrics: edit distance, character error rate, word accuracy

Strings are compared as sequences of Unicode code points; matching is exact
and case-sensitive.
"""

from typing import Sequence

from rapidfuzz.distance import Levenshtein


def levenshtein(a: str, b: str) -> int:
    """Minimum insertions, deletions and substitutions turning a into b"""
    return int(Levenshtein.distance(a, b))


def cer(pred: str, gt: str) -> float:
    """
    Character error rate in percent: 100 * levenshtein(pred, gt) / len(gt).

    May exceed 100 when the prediction is much longer than the ground truth.

    Raises:
        ValueError: empty ground truth
    """
    if not gt:
        raise ValueError("cer: ground truth is empty")
    return 100.0 * levenshtein(pred, gt) / len(gt)


def word_accuracy(preds: Sequence[str], gts: Sequence[str]) -> float:
    """Percentage of predictions exactly equal to their ground truth"""
    if len(preds) != len(gts):
        raise ValueError(f"word_accuracy: {len(preds)} predictions for {len(gts)} ground truths")
    if not gts:
        raise ValueError("word_accuracy: no samples")
    matches = sum(1 for p, g in zip(preds, gts) if p == g)
    return 100.0 * matches / len(gts)
