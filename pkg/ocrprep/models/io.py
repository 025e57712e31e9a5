"""
Saving and restoring networks through the checkpoint container

The model config block (kind, widths, vocab, ...) travels in the checkpoint
header, so a checkpoint alone is enough to rebuild its network.
"""

import logging
from pathlib import Path
from typing import Union

from ..errors import CheckpointError
from ..kernel import load_checkpoint, save_checkpoint
from ..losses.vocab import CharVocab
from .approximator import ApproximatorNet
from .layers import Module
from .preprocessor import PreprocessorNet

logger = logging.getLogger(__name__)

Network = Union[PreprocessorNet, ApproximatorNet]


def save_model(net: Network, path: Union[str, Path]) -> str:
    """Write weights and buffers; returns the file's sha256"""
    digest = save_checkpoint(path, net.state_dict(), net.config())
    logger.info("Saved %s checkpoint to %s (sha256 %s)", net.kind, path, digest[:12])
    return digest


def build_model(config: dict) -> Network:
    kind = config.get("kind")
    if kind == PreprocessorNet.kind:
        return PreprocessorNet(widths=tuple(config["widths"]), seed=config.get("seed", 0))
    if kind == ApproximatorNet.kind:
        return ApproximatorNet(
            vocab=CharVocab.from_dict(config["vocab"]),
            widths=tuple(config["widths"]),
            hidden=config["hidden"],
            bidirectional=config["bidirectional"],
            seed=config.get("seed", 0),
        )
    raise CheckpointError(f"unknown model kind {kind!r} in checkpoint header")


def load_model(path: Union[str, Path], expect: str = "") -> Network:
    """
    Rebuild a network from a checkpoint.

    Args:
        path: checkpoint file
        expect: required kind ("preprocessor" or "approximator"), or "" for any

    Raises:
        CheckpointError: missing/corrupt file, wrong kind, or mismatched state
    """
    state, config = load_checkpoint(path)
    net = build_model(config)
    if expect and net.kind != expect:
        raise CheckpointError(f"{path}: expected a {expect} checkpoint, found {net.kind}")
    net.load_state_dict(state)
    net.eval()
    return net


def copy_model(net: Module) -> Network:
    """Independent network with the same config, weights and buffers"""
    clone = build_model(net.config())  # type: ignore[attr-defined]
    clone.load_state_dict(net.state_dict())
    clone.train(net.training)
    return clone
