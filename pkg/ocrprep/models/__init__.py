"""
Trainable networks: the preprocessor (psi) and the recognizer approximator (phi)
"""

from .layers import Module, Conv2d, BatchNorm2d, ConvBlock, Linear, GRU, he_uniform, orthogonal
from .preprocessor import PreprocessorNet, preprocess, as_batch, DOWNSAMPLE
from .approximator import ApproximatorNet, approximate, INPUT_HEIGHT, INPUT_WIDTH, WIDTH_DOWNSAMPLE
from .decoding import decode_greedy, collapse_path
from .io import save_model, load_model, build_model, copy_model

__all__ = [
    "Module",
    "Conv2d",
    "BatchNorm2d",
    "ConvBlock",
    "Linear",
    "GRU",
    "he_uniform",
    "orthogonal",
    "PreprocessorNet",
    "preprocess",
    "as_batch",
    "DOWNSAMPLE",
    "ApproximatorNet",
    "approximate",
    "INPUT_HEIGHT",
    "INPUT_WIDTH",
    "WIDTH_DOWNSAMPLE",
    "decode_greedy",
    "collapse_path",
    "save_model",
    "load_model",
    "build_model",
    "copy_model",
]
