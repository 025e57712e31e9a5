"""
Preprocessor training with the mirrored score-function estimator

Per batch: g = Preprocessor(I); the gradient at g is the SFE estimate of the
Levenshtein loss plus beta times the analytic gradient of MSE(g, white). That
gradient is injected as the seed of a backward pass from g through the
preprocessor, followed by one Adam step on the preprocessor.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..data.render import Sample
from ..kernel import Adam, Tape, backward
from ..models.preprocessor import PreprocessorNet
from ..recognizers.base import Recognizer
from .common import epoch_batches, mean_or_none, stack_images
from .config import SFETrainConfig
from .estimators import GradientEstimate, sfe_gradient
from .metric_log import MetricLog, MetricRecord
from .nn_approx import StepStats, TrainResult, validation_record

logger = logging.getLogger(__name__)


def mse_to_white_grad(g: np.ndarray) -> np.ndarray:
    """d/dg of mean((1 - g)^2) over all elements of g"""
    return -2.0 * (1.0 - g) / g.size


def injected_gradient(estimates: Sequence[GradientEstimate], g: np.ndarray, beta: float) -> np.ndarray:
    """
    Seed gradient for the batch output g of shape (N, 1, H, W).

    Per-image estimates are averaged over the batch; the MSE term is the
    exact gradient of the batch-mean MSE.
    """
    est = np.stack([e.grad for e in estimates])[:, None, :, :] / len(estimates)
    return (est + beta * mse_to_white_grad(g)).astype(g.dtype)


class SFETrainer:
    """
    Args:
        preprocessor: identity-pretrained network to train
        recognizer: the unknown box
        cfg: hyperparameters
    """

    def __init__(self, preprocessor: PreprocessorNet, recognizer: Recognizer, cfg: SFETrainConfig):
        self.preprocessor = preprocessor
        self.recognizer = recognizer
        self.cfg = cfg
        self.optimizer = Adam.over(preprocessor.parameters(), lr=cfg.lr)
        self.rng = np.random.default_rng([cfg.seed, 4])

    def train_step(self, batch: Sequence[Sample]) -> StepStats:
        self.preprocessor.train()
        with Tape() as tape:
            g = self.preprocessor(stack_images([s.image for s in batch]))
        estimates = [
            sfe_gradient(g.data[i, 0], sample.text, self.cfg.sigma, self.cfg.n, self.recognizer, self.rng)
            for i, sample in enumerate(batch)
        ]
        backward(tape, g, grad=injected_gradient(estimates, g.data, self.cfg.beta), params=self.optimizer.params)
        self.optimizer.step()

        mse = float(np.mean((1.0 - g.data.astype(np.float64)) ** 2))
        lev = mean_or_none([e.mean_loss for e in estimates if e.samples_used])
        return StepStats(
            loss_total=(lev if lev is not None else 0.0) + self.cfg.beta * mse,
            loss_ctc=float("nan"),
            loss_mse=mse,
            loss_lev=lev,
            recognition_errors=2 * sum(e.pairs_dropped for e in estimates),
        )

    def train(
        self,
        samples: Sequence[Sample],
        val_samples: Optional[Sequence[Sample]] = None,
        log: Optional[MetricLog] = None,
        progress: bool = True,
    ) -> TrainResult:
        log = log if log is not None else MetricLog()
        validate = bool(val_samples) and self.cfg.validate_each_epoch
        if validate:
            log.append(validation_record(0, self.recognizer, self.preprocessor, val_samples))

        for epoch in range(1, self.cfg.epochs + 1):
            stats: list[StepStats] = []
            batches = epoch_batches(samples, self.cfg.batch_size, self.rng, self.cfg.max_samples)
            for batch in tqdm(batches, desc=f"train-sfe {epoch}", disable=not progress, leave=False):
                stats.append(self.train_step(batch))

            record = MetricRecord(
                epoch=epoch,
                split="train",
                loss_total=mean_or_none([s.loss_total for s in stats]),
                loss_lev=mean_or_none([s.loss_lev for s in stats if s.loss_lev is not None]),
                loss_mse=mean_or_none([s.loss_mse for s in stats]),
            )
            log.append(record)
            message = f"train-sfe epoch {epoch}: total {record.loss_total or 0.0:.4f}, levenshtein {record.loss_lev or 0.0:.4f}"
            if validate:
                val = validation_record(epoch, self.recognizer, self.preprocessor, val_samples)
                log.append(val)
                message += f", val accuracy {val.word_accuracy:.2f}, CER {val.cer:.2f}"
            logger.info(message)

        self.preprocessor.eval()
        return TrainResult(self.preprocessor, None, log)


def train_sfe(
    preprocessor: PreprocessorNet,
    samples: Sequence[Sample],
    cfg: SFETrainConfig,
    recognizer: Recognizer,
    val_samples: Optional[Sequence[Sample]] = None,
    log: Optional[MetricLog] = None,
    progress: bool = True,
) -> TrainResult:
    """Run SFE training for cfg.epochs epochs; the preprocessor is updated in place"""
    return SFETrainer(preprocessor, recognizer, cfg).train(samples, val_samples, log, progress)
