"""
Image degradations standing in for receipt and scene-text damage

Applied in a fixed order: contrast, blur, dot dropout, clutter, noise, then a
clamp to [0, 1]. The default config is the identity.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.ndimage import gaussian_filter

DOT_CELL = 3


class DegradationConfig(BaseModel):
    """Degradation parameters (all zero, contrast one: clean rendering)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    noise_sigma: float = Field(default=0.0, ge=0.0, le=1.0, description="std of additive Gaussian noise")
    blur_radius: float = Field(default=0.0, ge=0.0, le=5.0, description="Gaussian blur sigma in pixels")
    clutter_density: float = Field(default=0.0, ge=0.0, le=1.0, description="background specks per 3x3 area")
    contrast: float = Field(default=1.0, gt=0.0, le=1.0, description="ink darkness relative to background")
    dot_dropout: float = Field(default=0.0, ge=0.0, le=1.0, description="probability a 3x3 dot cell fades out")

    def is_identity(self) -> bool:
        return self == DegradationConfig()

    def with_noise(self, sigma: float) -> "DegradationConfig":
        return self.model_copy(update={"noise_sigma": sigma})


def _dot_dropout(image: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    h, w = image.shape
    cells = rng.random(((h + DOT_CELL - 1) // DOT_CELL, (w + DOT_CELL - 1) // DOT_CELL)) < p
    mask = np.kron(cells, np.ones((DOT_CELL, DOT_CELL), dtype=bool))[:h, :w]
    out = image.copy()
    # faded cells keep a trace of the ink
    out[mask] = 1.0 - 0.25 * (1.0 - out[mask])
    return out


def _clutter(image: np.ndarray, density: float, rng: np.random.Generator) -> np.ndarray:
    h, w = image.shape
    count = int(round(density * h * w / (DOT_CELL * DOT_CELL)))
    out = image.copy()
    for _ in range(count):
        sh, sw = rng.integers(1, 4, size=2)
        y = int(rng.integers(0, h - sh + 1))
        x = int(rng.integers(0, w - sw + 1))
        shade = rng.uniform(0.3, 0.8)
        out[y:y + sh, x:x + sw] = np.minimum(out[y:y + sh, x:x + sw], shade)
    return out


def degrade(image: np.ndarray, cfg: DegradationConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Degrade a clean [0, 1] image (dark ink on white).

    Every random draw comes from `rng`, so (image, cfg, rng state) fixes the output.
    """
    out = np.asarray(image, dtype=np.float64)
    if cfg.contrast != 1.0:
        out = 1.0 - cfg.contrast * (1.0 - out)
    if cfg.blur_radius > 0:
        out = gaussian_filter(out, sigma=cfg.blur_radius, mode="nearest")
    if cfg.dot_dropout > 0:
        out = _dot_dropout(out, cfg.dot_dropout, rng)
    if cfg.clutter_density > 0:
        out = _clutter(out, cfg.clutter_density, rng)
    if cfg.noise_sigma > 0:
        out = out + rng.normal(0.0, cfg.noise_sigma, size=out.shape)
    return np.clip(out, 0.0, 1.0).astype(np.float32)
