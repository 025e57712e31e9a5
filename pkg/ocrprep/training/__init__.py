"""
Training regimes: surrogate-network alternation, mirrored SFE, and pretraining
"""

from .config import NNTrainConfig, SFETrainConfig, PretrainConfig, DEFAULT_SIGMA_SET
from .estimators import GradientEstimate, sfe_gradient, mirrored_sfe, plain_sfe
from .metric_log import MetricLog, MetricRecord, COLUMNS
from .manifest import RunManifest, STANDARD_NOTES
from .pretrain import pretrain_approximator, pretrain_preprocessor_identity, greedy_accuracy, reconstruction_mse
from .nn_approx import SurrogateTrainer, StepStats, TrainResult, train_nn_approx
from .sfe import SFETrainer, train_sfe, injected_gradient, mse_to_white_grad

__all__ = [
    "NNTrainConfig",
    "SFETrainConfig",
    "PretrainConfig",
    "DEFAULT_SIGMA_SET",
    "GradientEstimate",
    "sfe_gradient",
    "mirrored_sfe",
    "plain_sfe",
    "MetricLog",
    "MetricRecord",
    "COLUMNS",
    "RunManifest",
    "STANDARD_NOTES",
    "pretrain_approximator",
    "pretrain_preprocessor_identity",
    "greedy_accuracy",
    "reconstruction_mse",
    "SurrogateTrainer",
    "StepStats",
    "TrainResult",
    "train_nn_approx",
    "SFETrainer",
    "train_sfe",
    "injected_gradient",
    "mse_to_white_grad",
]
