"""
Best-path CTC decoding
"""

from typing import Sequence, Union

import numpy as np

from ..kernel import Tensor
from ..losses.vocab import BLANK_INDEX, CharVocab


def collapse_path(path: Sequence[int], blank: int = BLANK_INDEX) -> list[int]:
    """Merge consecutive repeats, then drop blanks"""
    labels = []
    previous = None
    for index in path:
        index = int(index)
        if index != previous and index != blank:
            labels.append(index)
        previous = index
    return labels


def decode_greedy(log_probs: Union[Tensor, np.ndarray], vocab: CharVocab) -> Union[str, list[str]]:
    """
    Argmax per timestep, collapse repeats, drop blanks.

    (T, C) gives one string; (T, N, C) gives a list of N strings.
    """
    values = log_probs.data if isinstance(log_probs, Tensor) else np.asarray(log_probs)
    best = values.argmax(axis=-1)
    if values.ndim == 2:
        return vocab.decode(collapse_path(best, vocab.blank_index))
    return [vocab.decode(collapse_path(best[:, n], vocab.blank_index)) for n in range(best.shape[1])]
