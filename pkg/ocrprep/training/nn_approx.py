"""
Preprocessor training through a learned surrogate of the recognizer

Per batch of images I with ground truth p:

    g = Preprocessor(I)
    for s in 1..S:
        sigma_s ~ Uniform(sigma_set)
        x_s = clamp(g + N(0, sigma_s^2) per pixel)
        surrogate_s = CTC(Approximator(x_s), Recognizer(x_s))
    one Adam step on the approximator minimizing sum_s surrogate_s
    one Adam step on the preprocessor minimizing
        CTC(Approximator(g), p) + beta * MSE(g, white)   (approximator frozen, inference mode)

The surrogate's CTC target is the recognizer's output text, never the ground
truth; ground truth enters only in the preprocessor step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..data.render import Sample
from ..eval.evaluate import evaluate
from ..kernel import Adam, Tape, Tensor, backward
from ..losses.ctc import ctc_loss, is_feasible
from ..losses.image import CompositeLoss, composite_terms
from ..models.approximator import ApproximatorNet
from ..models.preprocessor import PreprocessorNet
from ..recognizers.base import Recognizer, recognize_many, text_or_none
from .common import epoch_batches, mean_or_none, stack_images
from .config import NNTrainConfig
from .metric_log import MetricLog, MetricRecord

logger = logging.getLogger(__name__)


@dataclass
class StepStats:
    loss_total: float
    loss_ctc: float
    loss_mse: float
    loss_approx: Optional[float] = None
    loss_lev: Optional[float] = None
    recognition_errors: int = 0
    skipped_targets: int = 0


@dataclass
class TrainResult:
    preprocessor: PreprocessorNet
    approximator: Optional[ApproximatorNet]
    log: MetricLog = field(default_factory=MetricLog)


def validation_record(
    epoch: int,
    recognizer: Recognizer,
    preprocessor: PreprocessorNet,
    val_samples: Sequence[Sample],
) -> MetricRecord:
    report = evaluate(recognizer, preprocessor, val_samples)
    return MetricRecord(epoch=epoch, split="val", word_accuracy=report.word_accuracy, cer=report.cer)


class SurrogateTrainer:
    """
    Alternating optimization of approximator and preprocessor.

    Args:
        preprocessor: network to train (identity-pretraining optional)
        approximator: pretrained surrogate of `recognizer`
        recognizer: the unknown box
        cfg: hyperparameters
    """

    def __init__(
        self,
        preprocessor: PreprocessorNet,
        approximator: ApproximatorNet,
        recognizer: Recognizer,
        cfg: NNTrainConfig,
    ):
        self.preprocessor = preprocessor
        self.approximator = approximator
        self.recognizer = recognizer
        self.cfg = cfg
        self.vocab = approximator.vocab
        self.opt_pre = Adam.over(preprocessor.parameters(), lr=cfg.lr_pre)
        self.opt_approx = Adam.over(approximator.parameters(), lr=cfg.lr_approx)
        self.rng = np.random.default_rng([cfg.seed, 3])

    def jitter(self, g: np.ndarray) -> list[np.ndarray]:
        """S clamped noisy copies of one (H, W) image; sigma drawn per copy"""
        copies = []
        for _ in range(self.cfg.S):
            sigma = float(self.rng.choice(self.cfg.sigma_set))
            noise = self.rng.normal(0.0, sigma, size=g.shape) if sigma > 0 else np.zeros_like(g)
            copies.append(np.clip(g + noise, 0.0, 1.0).astype(np.float32))
        return copies

    def approximator_step(self, jittered: Sequence[np.ndarray], batch_size: int) -> tuple[Optional[float], int, int]:
        """
        Fit the approximator to the recognizer's readings of the jittered images.

        Returns (per-image surrogate CTC summed over copies, recognition errors, skipped targets);
        the loss is None when no sample survived.
        """
        steps = self.approximator.timesteps()
        images, targets = [], []
        errors = skipped = 0
        for image, result in zip(jittered, recognize_many(self.recognizer, jittered)):
            text = text_or_none(result)
            if text is None:
                errors += 1
                continue
            try:
                target = self.vocab.encode(text, strict=False)
            except ValueError:
                skipped += 1
                continue
            if not is_feasible(target, steps):
                skipped += 1
                continue
            images.append(image)
            targets.append(target)

        if errors or skipped:
            logger.warning("approximator step: %d recognition errors, %d unusable targets", errors, skipped)
        if not images:
            return None, errors, skipped

        self.approximator.train()
        self.preprocessor.freeze()
        try:
            with Tape() as tape:
                total = ctc_loss(self.approximator(stack_images(images)), targets, reduction="sum")
                loss = total * (1.0 / batch_size)
            backward(tape, loss, params=self.opt_approx.params)
            self.opt_approx.step()
        finally:
            self.preprocessor.unfreeze()
        return loss.item(), errors, skipped

    def preprocessor_step(self, tape: Tape, g: Tensor, targets: Sequence[Sequence[int]]) -> CompositeLoss:
        """Composite-loss step on psi through the frozen approximator"""
        self.approximator.freeze()
        self.approximator.eval()
        try:
            with tape:
                terms = composite_terms(self.approximator(g), g, targets, self.cfg.beta)
            backward(tape, terms.total, params=self.opt_pre.params)
            self.opt_pre.step()
        finally:
            self.approximator.unfreeze()
            self.approximator.train()
        return terms

    def train_step(self, batch: Sequence[Sample]) -> StepStats:
        self.preprocessor.train()
        with Tape() as tape:
            g = self.preprocessor(stack_images([s.image for s in batch]))
        jittered = [copy for image in g.data[:, 0] for copy in self.jitter(image)]
        approx_loss, errors, skipped = self.approximator_step(jittered, len(batch))

        targets = [self.vocab.encode(s.text) for s in batch]
        terms = self.preprocessor_step(tape, g, targets)
        return StepStats(
            loss_total=terms.total.item(),
            loss_ctc=terms.ctc.item(),
            loss_mse=terms.mse.item(),
            loss_approx=approx_loss,
            recognition_errors=errors,
            skipped_targets=skipped,
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
            for batch in tqdm(batches, desc=f"train-nn {epoch}", disable=not progress, leave=False):
                stats.append(self.train_step(batch))

            record = MetricRecord(
                epoch=epoch,
                split="train",
                loss_total=mean_or_none([s.loss_total for s in stats]),
                loss_approx=mean_or_none([s.loss_approx for s in stats if s.loss_approx is not None]),
                loss_ctc=mean_or_none([s.loss_ctc for s in stats]),
                loss_mse=mean_or_none([s.loss_mse for s in stats]),
            )
            log.append(record)
            message = f"train-nn epoch {epoch}: total {record.loss_total or 0.0:.4f}, approx {record.loss_approx or 0.0:.4f}"
            if validate:
                val = validation_record(epoch, self.recognizer, self.preprocessor, val_samples)
                log.append(val)
                message += f", val accuracy {val.word_accuracy:.2f}, CER {val.cer:.2f}"
            logger.info(message)

        self.preprocessor.eval()
        self.approximator.eval()
        return TrainResult(self.preprocessor, self.approximator, log)


def train_nn_approx(
    preprocessor: PreprocessorNet,
    approximator: ApproximatorNet,
    samples: Sequence[Sample],
    cfg: NNTrainConfig,
    recognizer: Recognizer,
    val_samples: Optional[Sequence[Sample]] = None,
    log: Optional[MetricLog] = None,
    progress: bool = True,
) -> TrainResult:
    """Run surrogate training for cfg.epochs epochs; networks are updated in place"""
    trainer = SurrogateTrainer(preprocessor, approximator, recognizer, cfg)
    return trainer.train(samples, val_samples, log, progress)
