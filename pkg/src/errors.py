"""
Error hierarchy for the PIVOT toolkit.

Every error carries a human-readable message plus the structured attributes a
caller needs to react (field names, line numbers, retry hints). The CLI maps
the top-level families to exit codes.
"""

from typing import Any, List, Optional, Sequence


class PivotError(Exception):
    """Base class for all toolkit errors."""


# ==================== Configuration ====================


class ConfigurationError(PivotError):
    """Raised when a run configuration is missing or invalid."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class ManifestError(ConfigurationError):
    """Raised when a dataset manifest line cannot be parsed."""

    def __init__(self, message: str, line_number: int, field: Optional[str] = None):
        super().__init__(f"line {line_number}: {message}", field=field)
        self.line_number = line_number


# ==================== Action space ====================


class ActionSpaceError(PivotError):
    """Base class for action-space errors."""


class DimensionMismatch(ActionSpaceError):
    """Raised when an action's length does not match its space."""

    def __init__(self, expected: int, actual: int):
        super().__init__(f"Expected {expected} components, got {actual}")
        self.expected = expected
        self.actual = actual


class NonPositiveDepth(ActionSpaceError):
    """Raised when a point sits on or behind the camera plane."""

    def __init__(self, depth: float):
        super().__init__(f"Point has non-positive camera depth z={depth:.6g}")
        self.depth = depth


class MissingCamera(ActionSpaceError):
    """Raised when a cart3d space is mapped without a camera model."""


class ZeroVector(ActionSpaceError):
    """Raised when a direction is requested of a zero-length vector."""


# ==================== Annotation ====================


class AnnotationError(PivotError):
    """Base class for annotation errors."""


class EmptyCandidateSet(AnnotationError):
    """Raised when rendering is asked to draw nothing."""


class OutOfRangeDepth(AnnotationError):
    """Raised when a depth lies outside the styling range."""

    def __init__(self, depth: float, z_min: float, z_max: float):
        super().__init__(f"Depth {depth:.6g} outside [{z_min:.6g}, {z_max:.6g}]")
        self.depth = depth
        self.z_min = z_min
        self.z_max = z_max


class ImageIOError(PivotError):
    """Raised when an image cannot be read or written."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{message}: {path}")
        self.path = path


# ==================== Optimization ====================


class OptimizationError(PivotError):
    """Base class for optimizer errors."""


class EmptySelection(OptimizationError):
    """Raised when a distribution is fitted to no actions."""


class ParallelPivotError(OptimizationError):
    """Raised when every parallel instance failed."""

    def __init__(self, errors: Sequence[BaseException]):
        super().__init__(f"All {len(errors)} parallel instances failed: {errors[0]!r}")
        self.errors: List[BaseException] = list(errors)


# ==================== Oracle ====================


class OracleError(PivotError):
    """Base class for selection-oracle errors."""


class OracleTransportError(OracleError):
    """Raised when the oracle endpoint cannot be reached or answers non-2xx."""

    def __init__(self, message: str, status_code: Optional[int] = None):
        super().__init__(message)
        self.status_code = status_code


class RateLimited(OracleTransportError):
    """Raised on HTTP 429; retry_after is the server hint in seconds."""

    def __init__(self, message: str, retry_after: Optional[float] = None):
        super().__init__(message, status_code=429)
        self.retry_after = retry_after


class SelectionParseError(OracleError):
    """Base class for oracle answers that yield no usable labels."""

    def __init__(self, message: str, raw_text: str):
        super().__init__(message)
        self.raw_text = raw_text


class Unparseable(SelectionParseError):
    """Raised when no answer block is found in the oracle text."""

    def __init__(self, raw_text: str):
        preview = raw_text[:80].replace("\n", " ")
        super().__init__(f"No answer block in oracle text: {preview!r}", raw_text)


class EmptyAfterFilter(SelectionParseError):
    """Raised when every parsed label is outside the rendered set."""

    def __init__(self, raw_text: str, raw_labels: Sequence[Any]):
        super().__init__(f"No valid labels among {list(raw_labels)}", raw_text)
        self.raw_labels = list(raw_labels)


class ScriptExhausted(OracleError):
    """Raised when a replay oracle runs out of canned responses."""


class MissingExemplars(OracleError):
    """Raised when a few-shot prompt has no exemplars to show."""


# ==================== Evaluation ====================


class RecordIOError(PivotError):
    """Raised when a dataset record's files cannot be loaded."""

    def __init__(self, message: str, record_index: int, path: str):
        super().__init__(f"record {record_index}: {message}: {path}")
        self.record_index = record_index
        self.path = path


# ==================== Simulation ====================


class SimulationError(PivotError):
    """Base class for simulator errors."""


class BudgetExhausted(SimulationError):
    """Raised when stepping a world that has used its whole step budget."""


class TargetOutOfView(SimulationError):
    """Raised when the target does not project inside the view."""


class WorldConfigError(ConfigurationError):
    """Raised when a world definition is inconsistent."""
