"""
Evaluation harness

Baseline: recognize the raw crops. Treated: recognize the preprocessor's
output. Recognition errors are counted separately and excluded from both the
accuracy and the CER denominators.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from ..data.dataset import write_png
from ..data.render import Sample
from ..kernel import Tensor, no_grad
from ..losses.text_metrics import cer
from ..models.preprocessor import PreprocessorNet
from ..recognizers.base import Recognizer, recognize_many, text_or_none
from .report import NO_PREPROCESSOR, MetricsReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
SEPARATOR_WIDTH = 4


def run_preprocessor(net: PreprocessorNet, images: Sequence[np.ndarray], batch_size: int = 32) -> list[np.ndarray]:
    """Inference-mode outputs for a list of (H, W) images"""
    was_training = net.training
    net.eval()
    outputs: list[np.ndarray] = []
    with no_grad():
        for start in range(0, len(images), batch_size):
            chunk = np.stack(images[start:start + batch_size])[:, None, :, :]
            out = net(Tensor(chunk.astype(np.float32)))
            outputs.extend(out.data[:, 0])
    net.train(was_training)
    return outputs


def evaluate(
    recognizer: Recognizer,
    preprocessor: Optional[PreprocessorNet],
    samples: Sequence[Sample],
    dataset_id: str = "",
    preprocessor_id: Optional[str] = None,
    batch_size: int = 32,
    progress: bool = False,
) -> MetricsReport:
    """
    Word accuracy and mean per-sample CER of `recognizer` on `samples`.

    Aggregation is exact (integer match count, math.fsum for CER), so the
    report does not depend on sample order.
    """
    if not samples:
        raise ValueError("evaluate: empty dataset")
    correct = 0
    errors = 0
    cers: list[float] = []

    for start in tqdm(range(0, len(samples), batch_size), desc="evaluate", disable=not progress):
        chunk = samples[start:start + batch_size]
        images = [s.image for s in chunk]
        if preprocessor is not None:
            images = run_preprocessor(preprocessor, images, batch_size)
        for sample, result in zip(chunk, recognize_many(recognizer, images)):
            text = text_or_none(result)
            if text is None:
                errors += 1
                logger.warning("Recognition error on %s: %s", sample.path or sample.text, result)
                continue
            correct += text == sample.text
            cers.append(cer(text, sample.text))

    scored = len(samples) - errors
    return MetricsReport(
        dataset_id=dataset_id,
        recognizer_id=recognizer.name,
        preprocessor_id=preprocessor_id or (NO_PREPROCESSOR if preprocessor is None else "preprocessor"),
        word_accuracy=100.0 * correct / scored if scored else 0.0,
        cer=math.fsum(cers) / scored if scored else 0.0,
        n_samples=len(samples),
        n_errors=errors,
    )


def cross_engine_eval(
    preprocessor: PreprocessorNet,
    trained_with: str,
    recognizer: Recognizer,
    samples: Sequence[Sample],
    dataset_id: str = "",
    preprocessor_id: Optional[str] = None,
    progress: bool = False,
) -> MetricsReport:
    """evaluate() for a preprocessor trained with one engine, tested with another"""
    if trained_with == recognizer.name:
        logger.info("cross_engine_eval: training and test engine are both %s", trained_with)
    report = evaluate(recognizer, preprocessor, samples, dataset_id, preprocessor_id, progress=progress)
    report.trained_with = trained_with
    return report


def side_by_side(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Input | mid-gray separator | output"""
    separator = np.full((left.shape[0], SEPARATOR_WIDTH), 0.5, dtype=np.float32)
    return np.concatenate([left, separator, right], axis=1)


def export_images(
    preprocessor: PreprocessorNet,
    samples: Sequence[Sample],
    out_dir: PathLike,
    count: int = 10,
) -> list[Path]:
    """
    Write `count` input/output pairs as side-by-side PNGs.

    Raises:
        ValueError: fewer samples than requested
        OSError: output directory not writable
    """
    if count > len(samples):
        raise ValueError(f"export_images: {count} pairs requested, dataset has {len(samples)} samples")
    chosen = list(samples[:count])
    outputs = run_preprocessor(preprocessor, [s.image for s in chosen])
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, (sample, output) in enumerate(zip(chosen, outputs)):
        path = out_dir / f"{i:04d}_{sample.text or 'empty'}.png"
        write_png(path, side_by_side(sample.image, output))
        paths.append(path)
    logger.info("Wrote %d image pairs to %s", len(paths), out_dir)
    return paths
