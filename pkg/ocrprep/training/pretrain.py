"""
Pretraining protocols

* Approximator warm start: CTC on raw (unpreprocessed) crops against their
  ground truth, so the surrogate does not start cold.
* Preprocessor identity: mean-square error between output and input, so the
  SFE trainer starts from a network that passes images through.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..data.render import Sample
from ..kernel import Adam, Tape, backward, no_grad, ops
from ..losses.ctc import ctc_loss, is_feasible
from ..models.approximator import ApproximatorNet
from ..models.decoding import decode_greedy
from ..models.preprocessor import PreprocessorNet
from .common import epoch_batches, mean_or_none, stack_images
from .config import PretrainConfig
from .metric_log import MetricLog, MetricRecord

logger = logging.getLogger(__name__)


def pretrain_approximator(
    net: ApproximatorNet,
    samples: Sequence[Sample],
    cfg: PretrainConfig,
    val_samples: Optional[Sequence[Sample]] = None,
    log: Optional[MetricLog] = None,
    progress: bool = True,
) -> ApproximatorNet:
    """
    Train `net` in place with CTC on raw images for cfg.approx_epochs epochs.

    Samples whose target cannot be aligned in the available timesteps are
    skipped and counted.
    """
    vocab = net.vocab
    steps = net.timesteps()
    optimizer = Adam.over(net.parameters(), lr=cfg.lr_approx)
    rng = np.random.default_rng([cfg.seed, 1])

    for epoch in range(1, cfg.approx_epochs + 1):
        net.train()
        losses = []
        skipped = 0
        batches = epoch_batches(samples, cfg.batch_size, rng, cfg.max_samples)
        for batch in tqdm(batches, desc=f"pretrain-approx {epoch}", disable=not progress, leave=False):
            kept = [s for s in batch if is_feasible(vocab.encode(s.text, strict=False), steps)]
            skipped += len(batch) - len(kept)
            if not kept:
                continue
            targets = [vocab.encode(s.text, strict=False) for s in kept]
            with Tape() as tape:
                loss = ctc_loss(net(stack_images([s.image for s in kept])), targets)
            backward(tape, loss, params=optimizer.params)
            optimizer.step()
            losses.append(loss.item())

        if skipped:
            logger.warning("pretrain-approx epoch %d: skipped %d infeasible CTC targets", epoch, skipped)
        record = MetricRecord(epoch=epoch, split="train", loss_ctc=mean_or_none(losses), loss_total=mean_or_none(losses))
        if log is not None:
            log.append(record)
        if val_samples:
            acc = greedy_accuracy(net, val_samples)
            if log is not None:
                log.append(MetricRecord(epoch=epoch, split="val", word_accuracy=acc))
            logger.info("pretrain-approx epoch %d: ctc %.4f, val greedy accuracy %.2f", epoch, record.loss_ctc or 0.0, acc)
        else:
            logger.info("pretrain-approx epoch %d: ctc %.4f", epoch, record.loss_ctc or 0.0)

    net.eval()
    return net


def greedy_accuracy(net: ApproximatorNet, samples: Sequence[Sample], batch_size: int = 32) -> float:
    """Percentage of samples whose best-path decoding equals the ground truth"""
    was_training = net.training
    net.eval()
    correct = 0
    with no_grad():
        for start in range(0, len(samples), batch_size):
            chunk = samples[start:start + batch_size]
            texts = decode_greedy(net(stack_images([s.image for s in chunk])), net.vocab)
            correct += sum(1 for text, s in zip(texts, chunk) if text == s.text)
    net.train(was_training)
    return 100.0 * correct / len(samples)


def pretrain_preprocessor_identity(
    net: PreprocessorNet,
    samples: Sequence[Sample],
    cfg: PretrainConfig,
    val_samples: Optional[Sequence[Sample]] = None,
    log: Optional[MetricLog] = None,
    progress: bool = True,
) -> PreprocessorNet:
    """Train `net` in place to reproduce its input (MSE) for cfg.identity_epochs epochs"""
    optimizer = Adam.over(net.parameters(), lr=cfg.lr_identity)
    rng = np.random.default_rng([cfg.seed, 2])

    for epoch in range(1, cfg.identity_epochs + 1):
        net.train()
        losses = []
        batches = epoch_batches(samples, cfg.batch_size, rng, cfg.max_samples)
        for batch in tqdm(batches, desc=f"pretrain-identity {epoch}", disable=not progress, leave=False):
            x = stack_images([s.image for s in batch])
            with Tape() as tape:
                loss = ops.mse(net(x), x)
            backward(tape, loss, params=optimizer.params)
            optimizer.step()
            losses.append(loss.item())

        train_mse = mean_or_none(losses)
        if log is not None:
            log.append(MetricRecord(epoch=epoch, split="train", loss_mse=train_mse, loss_total=train_mse))
        if val_samples:
            val_mse = reconstruction_mse(net, val_samples)
            if log is not None:
                log.append(MetricRecord(epoch=epoch, split="val", loss_mse=val_mse))
            logger.info("pretrain-identity epoch %d: mse %.6f, val mse %.6f", epoch, train_mse or 0.0, val_mse)
        else:
            logger.info("pretrain-identity epoch %d: mse %.6f", epoch, train_mse or 0.0)

    net.eval()
    return net


def reconstruction_mse(net: PreprocessorNet, samples: Sequence[Sample], batch_size: int = 32) -> float:
    """Mean-square difference between inference-mode output and input"""
    was_training = net.training
    net.eval()
    total = 0.0
    with no_grad():
        for start in range(0, len(samples), batch_size):
            x = stack_images([s.image for s in samples[start:start + batch_size]])
            total += float(((net(x).data - x.data) ** 2).sum(dtype=np.float64))
    net.train(was_training)
    return total / (len(samples) * samples[0].image.size)
