"""
Training hyperparameters

Defaults follow the published training protocol: S = 2 jittered samples,
sigma drawn uniformly from {0, 0.01, ..., 0.05}, preprocessor lr 5e-5,
approximator lr 1e-4, beta = 1, 50 epochs; SFE with n = 5 and sigma = 0.05.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

DEFAULT_SIGMA_SET = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05)


class NNTrainConfig(BaseModel):
    """Surrogate-network training (alternating approximator / preprocessor steps)"""
    model_config = ConfigDict(extra="forbid")

    S: int = Field(default=2, ge=1, description="jittered samples per image")
    sigma_set: tuple[float, ...] = Field(default=DEFAULT_SIGMA_SET, min_length=1)
    lr_pre: float = Field(default=5e-5, gt=0.0)
    lr_approx: float = Field(default=1e-4, gt=0.0)
    beta: float = Field(default=1.0, ge=0.0)
    epochs: int = Field(default=50, ge=0)
    seed: int = 0
    batch_size: int = Field(default=1, ge=1)
    max_samples: Optional[int] = Field(default=None, ge=1, description="cap on training images per epoch")
    validate_each_epoch: bool = True

    @field_validator("sigma_set")
    @classmethod
    def _non_negative(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        for sigma in value:
            if sigma < 0:
                raise ValueError(f"noise std {sigma} is negative")
        return value


class SFETrainConfig(BaseModel):
    """Mirrored score-function-estimator training"""
    model_config = ConfigDict(extra="forbid")

    n: int = Field(default=5, ge=1, description="perturbations before mirroring")
    sigma: float = Field(default=0.05, gt=0.0)
    lr: float = Field(default=5e-5, gt=0.0)
    beta: float = Field(default=1.0, ge=0.0)
    epochs: int = Field(default=50, ge=0)
    seed: int = 0
    batch_size: int = Field(default=1, ge=1)
    max_samples: Optional[int] = Field(default=None, ge=1)
    validate_each_epoch: bool = True


class PretrainConfig(BaseModel):
    """Approximator warm start on raw images and preprocessor identity pretraining"""
    model_config = ConfigDict(extra="forbid")

    approx_epochs: int = Field(default=50, ge=0)
    lr_approx: float = Field(default=1e-4, gt=0.0)
    identity_epochs: int = Field(default=5, ge=0)
    lr_identity: float = Field(default=1e-3, gt=0.0)
    batch_size: int = Field(default=16, ge=1)
    max_samples: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
