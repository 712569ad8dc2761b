"""Shared exception types."""


class FaceRemixError(Exception):
    """Base class for errors raised by this package."""


class ShapeMismatch(FaceRemixError, ValueError):
    """Inputs that must share a shape/resolution do not."""


class UnquantizedLabel(FaceRemixError, ValueError):
    """An operation that requires a palette-exact label map got a raw one."""


class FingerprintMismatch(FaceRemixError, ValueError):
    """Stored parameters do not match the requested network configuration."""


class CorruptCheckpoint(FaceRemixError, ValueError):
    """Checkpoint archive is truncated, has a bad magic header, or fails to decode."""


class TrainingDiverged(FaceRemixError, RuntimeError):
    """A loss term became non-finite during training."""

    def __init__(self, term: str, value: float):
        super().__init__(f"non-finite loss term '{term}' ({value})")
        self.term = term
        self.value = value
