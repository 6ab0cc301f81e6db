"""
Adaptive-Gravity Custom Exceptions

This module provides the exception hierarchy used across the gravity services.
All errors derive from GravityException so that callers (the management
command in particular) can separate configuration problems from runtime
failures and report both consistently.

Author: DSP Development Team
Version: 1.0.0
"""

from typing import Optional, Dict, Any, Iterable, Sequence


class GravityException(Exception):
    """
    Base exception class for all Adaptive-Gravity errors.

    Attributes:
        message (str): Human-readable error message
        error_code (Optional[str]): Stable identifier for the error type
        details (Dict[str, Any]): Additional error details

    Example:
        >>> try:
        ...     run_gravity(config, dataset, baseline)
        ... except GravityException as e:
        ...     logger.error(f"Gravity run failed: {e.message}")
        ...     logger.debug(e.to_dict())
    """

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        self.message = message
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert exception to dictionary for serialization.

        Returns:
            Dictionary representation of the exception
        """
        return {
            'message': self.message,
            'error_code': self.error_code,
            'details': self.details,
            'exception_type': self.__class__.__name__
        }


# --- Autodiff ---

class ShapeMismatchError(GravityException):
    """
    Raised when an operation receives operands whose shapes it cannot combine.

    Attributes:
        op (str): Name of the operation
        shapes (list): Offending operand shapes
    """

    def __init__(self, op: str, shapes: Sequence[Sequence[int]], reason: str = "") -> None:
        self.op = op
        self.shapes = [tuple(s) for s in shapes]
        text = f"Shape mismatch in '{op}': {' vs '.join(str(s) for s in self.shapes)}"
        if reason:
            text = f"{text} ({reason})"
        super().__init__(text, details={'op': op, 'shapes': [list(s) for s in self.shapes]})


class NonScalarLossError(GravityException):
    """Raised when backward() is called on a tensor with more than one element."""

    def __init__(self, shape: Sequence[int]) -> None:
        super().__init__(
            f"backward() requires a scalar loss, got shape {tuple(shape)}",
            details={'shape': list(shape)}
        )


class MissingGradientError(GravityException):
    """Raised when the optimizer finds a parameter without a gradient."""

    def __init__(self, names: Iterable[str]) -> None:
        names = list(names)
        super().__init__(
            f"Parameters without gradient: {', '.join(names)}",
            details={'parameters': names}
        )


class NumericalDivergenceError(GravityException):
    """
    Raised when NaN or Inf values appear in a forward or backward pass.

    The run is aborted at the first offending operation instead of letting the
    values propagate into the parameters.
    """

    def __init__(self, where: str, phase: str = "forward") -> None:
        super().__init__(
            f"Non-finite values detected during {phase} in '{where}'",
            details={'where': where, 'phase': phase}
        )


class CheckpointFormatError(GravityException):
    """Raised when a parameter checkpoint cannot be decoded."""


# --- Models ---

class ModelSpecError(GravityException):
    """Raised for invalid or unsupported model definitions."""


# --- Geometry ---

class EmptyClassError(GravityException):
    """
    Raised when at least one class has no samples in the latent batch.

    Attributes:
        missing (list): Class ids without samples
    """

    def __init__(self, missing: Iterable[int]) -> None:
        self.missing = sorted(int(m) for m in missing)
        super().__init__(
            f"Classes without samples: {self.missing}",
            details={'missing_classes': self.missing}
        )


class AllZeroForcesError(GravityException):
    """Raised when every total force vanishes, leaving no direction to relocate."""

    def __init__(self, message: str = "All anti-gravity forces are zero; no relocation direction") -> None:
        super().__init__(message)


# --- Training ---

class UnknownLabelError(GravityException):
    """Raised when a label has no corresponding target centroid."""

    def __init__(self, labels: Iterable[int], num_targets: int) -> None:
        labels = sorted({int(v) for v in labels})
        super().__init__(
            f"Labels {labels} have no target centroid (targets available: {num_targets})",
            details={'labels': labels, 'num_targets': num_targets}
        )


# --- Data ---

class DatasetError(GravityException):
    """Base class for dataset ingestion errors."""


class BadMagicError(DatasetError):
    """Raised when an IDX file starts with an unexpected magic number."""

    def __init__(self, path: str, expected: int, found: int) -> None:
        super().__init__(
            f"Bad magic number in {path}: expected 0x{expected:08x}, found 0x{found:08x}",
            details={'path': str(path), 'expected': expected, 'found': found}
        )


class TruncatedFileError(DatasetError):
    """Raised when an IDX file ends before its declared payload."""

    def __init__(self, path: str, expected_bytes: int, found_bytes: int) -> None:
        super().__init__(
            f"Truncated IDX file {path}: expected {expected_bytes} bytes, found {found_bytes}",
            details={'path': str(path), 'expected_bytes': expected_bytes, 'found_bytes': found_bytes}
        )


class CountMismatchError(DatasetError):
    """Raised when image and label files declare different item counts."""

    def __init__(self, images: int, labels: int) -> None:
        super().__init__(
            f"Image count {images} does not match label count {labels}",
            details={'images': images, 'labels': labels}
        )


class UnknownSplitError(DatasetError):
    """Raised when a dataset split other than train/eval is requested."""

    def __init__(self, split: str) -> None:
        super().__init__(f"Unknown split '{split}' (expected 'train' or 'eval')", details={'split': split})


# --- Attacks ---

class AttackConfigError(GravityException):
    """Raised for invalid attack configurations."""


# --- Metrics / Selection ---

class DegenerateSeriesError(GravityException):
    """Raised when a metric series cannot be normalised (zero maximum)."""


class NoEligibleIterationsError(GravityException):
    """Raised when no iteration reaches the accuracy threshold."""

    def __init__(self, threshold: float, best_accuracy: Optional[float] = None) -> None:
        message = f"No iteration reaches the accuracy threshold {threshold}"
        if best_accuracy is not None:
            message = f"{message} (best accuracy: {best_accuracy:.6f})"
        super().__init__(message, details={'threshold': threshold, 'best_accuracy': best_accuracy})


class MissingRobustScoreError(GravityException):
    """Raised when a Pareto-front member has no robust accuracy to choose by."""

    def __init__(self, iterations: Iterable[int]) -> None:
        iterations = sorted(int(k) for k in iterations)
        super().__init__(
            f"No robust accuracy for front iterations {iterations}",
            details={'iterations': iterations}
        )


# --- Harness ---

class ConfigValidationError(GravityException):
    """
    Raised when an experiment configuration fails validation.

    Attributes:
        field_errors (Dict[str, list]): Messages keyed by dotted field path
    """

    def __init__(self, field_errors: Dict[str, list]) -> None:
        self.field_errors = field_errors
        lines = [f"{path}: {'; '.join(str(m) for m in messages)}" for path, messages in sorted(field_errors.items())]
        super().__init__(
            "Invalid experiment configuration:\n  " + "\n  ".join(lines),
            details={'field_errors': field_errors}
        )


class ArtifactMissingError(GravityException):
    """Raised when a pipeline stage needs an artifact an earlier stage did not produce."""

    def __init__(self, path: str, stage: str) -> None:
        super().__init__(
            f"Missing artifact {path}; run 'agrav {stage}' first",
            details={'path': str(path), 'stage': stage}
        )
