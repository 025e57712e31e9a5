"""
Score-function gradient estimators

With perturbations x_i = theta + sigma * eps_i and mirrored partners
eps_{n+i} = -eps_i, the mirrored estimator is

    (1 / (2 n sigma)) * sum_{i=1}^{2n} L_i eps_i
  = (1 / (2 n sigma)) * sum_{i=1}^{n} (L_i - L_{n+i}) eps_i

which cancels exactly whenever L does not depend on the input.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..losses.text_metrics import levenshtein
from ..recognizers.base import Recognizer, recognize_many, text_or_none

logger = logging.getLogger(__name__)


@dataclass
class GradientEstimate:
    """Estimated d(loss)/d(image) plus bookkeeping"""
    grad: np.ndarray
    samples_used: int
    pairs_dropped: int = 0
    mean_loss: float = float("nan")


def mirrored_sfe(
    f: Callable[[np.ndarray], float],
    theta: np.ndarray,
    sigma: float,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Mirrored estimate of grad f(theta) from n antithetic pairs (2n evaluations)"""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for _ in range(n):
        eps = rng.standard_normal(theta.shape)
        grad += (f(theta + sigma * eps) - f(theta - sigma * eps)) * eps
    return grad / (2.0 * n * sigma)


def plain_sfe(
    f: Callable[[np.ndarray], float],
    theta: np.ndarray,
    sigma: float,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Unmirrored estimate of grad f(theta) from n independent perturbations"""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for _ in range(n):
        eps = rng.standard_normal(theta.shape)
        grad += f(theta + sigma * eps) * eps
    return grad / (n * sigma)


def sfe_gradient(
    g: np.ndarray,
    target: str,
    sigma: float,
    n: int,
    recognizer: Recognizer,
    rng: np.random.Generator,
) -> GradientEstimate:
    """
    Mirrored estimate of d levenshtein(recognize(g), target) / d g.

    Perturbed images are clamped to [0, 1] before recognition. A pair where
    either recognition fails is dropped and the normalizer shrinks to the
    surviving pair count.

    Raises:
        ValueError: sigma <= 0 or n < 1
    """
    if sigma <= 0:
        raise ValueError(f"sfe_gradient: sigma must be positive, got {sigma}")
    if n < 1:
        raise ValueError(f"sfe_gradient: n must be at least 1, got {n}")

    g = np.asarray(g, dtype=np.float64)
    eps = rng.standard_normal((n,) + g.shape)
    images = [np.clip(g + sigma * e, 0.0, 1.0) for e in eps]
    images += [np.clip(g - sigma * e, 0.0, 1.0) for e in eps]
    results = recognize_many(recognizer, images)

    grad = np.zeros_like(g)
    kept = 0
    losses = []
    for i in range(n):
        plus, minus = text_or_none(results[i]), text_or_none(results[n + i])
        if plus is None or minus is None:
            continue
        l_plus, l_minus = levenshtein(plus, target), levenshtein(minus, target)
        losses.extend((l_plus, l_minus))
        grad += (l_plus - l_minus) * eps[i]
        kept += 1

    dropped = n - kept
    if dropped:
        logger.warning("sfe_gradient: dropped %d of %d pairs after recognition errors", dropped, n)
    if kept:
        grad /= 2.0 * kept * sigma
    return GradientEstimate(
        grad=grad.astype(np.float32),
        samples_used=2 * kept,
        pairs_dropped=dropped,
        mean_loss=float(np.mean(losses)) if losses else float("nan"),
    )
