"""
Exception hierarchy for ocrprep

Every error derives from OcrPrepError and from the matching builtin, so callers
can catch either.
"""


class OcrPrepError(Exception):
    """Root of all ocrprep errors"""


class ShapeError(OcrPrepError, ValueError):
    """A primitive or network received tensors of incompatible shape"""


class GradientError(OcrPrepError, RuntimeError):
    """Backward pass or optimizer step cannot proceed"""


class InfeasibleTargetError(OcrPrepError, ValueError):
    """A CTC target cannot be aligned within the available timesteps"""


class RecognitionError(OcrPrepError, RuntimeError):
    """The unknown-box recognizer failed (distinct from returning empty text)"""


class DatasetError(OcrPrepError, ValueError):
    """A dataset manifest entry or image is missing, corrupt or out of vocabulary"""


class ConfigError(OcrPrepError, ValueError):
    """Configuration value rejected; the message names the offending key"""


class CheckpointError(OcrPrepError, ValueError):
    """Checkpoint container is malformed or does not fit the model"""
