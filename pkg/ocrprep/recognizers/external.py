"""
External-process recognizer adapter

Protocol (see docs/external_ocr_protocol.md):

1. The image is written as an 8-bit grayscale PNG to a fresh temporary file.
2. The command line is split shell-style; every `{image}` occurrence is
   replaced by that file's path. No shell is involved.
3. Standard output is decoded as UTF-8 and stripped of surrounding whitespace.
4. A nonzero exit status, a timeout, or undecodable output raises
   RecognitionError carrying the diagnostic.
"""

from __future__ import annotations

import logging
import os
import shlex
import subprocess
import tempfile
import threading
from pathlib import Path
from typing import Optional

import numpy as np

from ..data.dataset import write_png
from ..errors import RecognitionError
from .base import RecognizerCapabilities, prepare_image

logger = logging.getLogger(__name__)

PLACEHOLDER = "{image}"
COMMAND_ENV = "OCRPREP_OCR_COMMAND"
STDERR_TAIL = 400


class ExternalRecognizer:
    """
    Wraps an OCR binary behind the unknown-box contract.

    Args:
        command: command line with an optional `{image}` placeholder
        timeout: seconds before a call is abandoned
        max_concurrency: concurrent invocations allowed
        deterministic: whether the wrapped engine is known to be deterministic
        name: identifier used in reports (defaults to the program name)
    """

    def __init__(
        self,
        command: str,
        timeout: float = 30.0,
        max_concurrency: int = 1,
        deterministic: bool = False,
        name: Optional[str] = None,
    ):
        self.argv = shlex.split(command)
        if not self.argv:
            raise ValueError("ExternalRecognizer: empty command")
        if timeout <= 0:
            raise ValueError(f"ExternalRecognizer: timeout must be positive, got {timeout}")
        self.command = command
        self.timeout = timeout
        self.name = name or f"external:{Path(self.argv[0]).name}"
        self._slots = threading.BoundedSemaphore(max(1, max_concurrency))
        self._capabilities = RecognizerCapabilities(
            concurrent_calls_safe=True,
            max_image_size=(4096, 4096),
            deterministic=deterministic,
            max_concurrency=max(1, max_concurrency),
        )

    @classmethod
    def from_env(cls, default: str = "", **kwargs) -> "ExternalRecognizer":
        """Command from OCRPREP_OCR_COMMAND, falling back to `default`"""
        command = os.environ.get(COMMAND_ENV, default)
        if not command:
            raise ValueError(f"no external OCR command configured (set {COMMAND_ENV})")
        return cls(command, **kwargs)

    @property
    def capabilities(self) -> RecognizerCapabilities:
        return self._capabilities

    def _argv_for(self, image_path: Path) -> list[str]:
        return [arg.replace(PLACEHOLDER, str(image_path)) for arg in self.argv]

    def recognize(self, image: np.ndarray) -> str:
        pixels = prepare_image(image, self._capabilities)
        with self._slots, tempfile.TemporaryDirectory(prefix="ocrprep-") as tmp:
            image_path = Path(tmp) / "word.png"
            write_png(image_path, pixels)
            argv = self._argv_for(image_path)
            try:
                result = subprocess.run(argv, capture_output=True, timeout=self.timeout, check=False)
            except subprocess.TimeoutExpired:
                raise RecognitionError(f"{self.name}: timed out after {self.timeout} s") from None
            except OSError as e:
                raise RecognitionError(f"{self.name}: cannot start {argv[0]!r}: {e}") from None

        if result.returncode != 0:
            stderr = result.stderr.decode("utf-8", errors="replace").strip()[-STDERR_TAIL:]
            raise RecognitionError(f"{self.name}: exit status {result.returncode}: {stderr}")
        try:
            text = result.stdout.decode("utf-8")
        except UnicodeDecodeError as e:
            raise RecognitionError(f"{self.name}: output is not valid UTF-8: {e}") from None
        return text.strip()

    def __repr__(self) -> str:
        return f"ExternalRecognizer(command={self.command!r}, timeout={self.timeout})"
