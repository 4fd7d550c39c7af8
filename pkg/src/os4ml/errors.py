"""Typed error hierarchy shared by every platform layer.

Each error carries a stable machine-readable ``code`` so the HTTP layer can
map failures to responses without string matching, and ``details`` for
aggregated reports (validation violations, per-trial failures).
"""

from __future__ import annotations


class PlatformError(Exception):
    code = "error"

    def __init__(self, message: str, details: list[str] | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or []


class NotFoundError(PlatformError):
    code = "not-found"


class ConflictError(PlatformError):
    code = "conflict"


class InvalidStateError(PlatformError):
    code = "invalid-state"


# --- object store ---------------------------------------------------------

class InvalidBucketError(PlatformError):
    code = "invalid-bucket"


class CorruptionError(PlatformError):
    code = "corruption"


class StorageIOError(PlatformError):
    code = "io-error"


# --- dataset ingest -------------------------------------------------------

class EncodingError(PlatformError):
    code = "encoding-error"


class ShapeError(PlatformError):
    code = "shape-error"

    def __init__(self, message: str, row: int):
        super().__init__(message)
        self.row = row


class CsvSchemaError(PlatformError):
    code = "schema-error"


class EmptyDatasetError(PlatformError):
    code = "empty-dataset"


class UndetectableColumnError(PlatformError):
    code = "undetectable-column"


class IngestionError(PlatformError):
    code = "ingestion-error"


# --- declarative config ---------------------------------------------------

class ValidationError(PlatformError):
    """Aggregated report: every violated invariant is one entry in details."""

    code = "validation-error"

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations), details=violations)
        self.violations = violations


class UnsupportedTargetError(PlatformError):
    code = "unsupported-target"


class ConfigParseError(PlatformError):
    code = "parse-error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class StrictModeError(PlatformError):
    code = "strict-mode"


# --- model engine ---------------------------------------------------------

class SplitError(PlatformError):
    code = "split-error"


class FitError(PlatformError):
    code = "fit-error"


class EncodeError(PlatformError):
    code = "encode-error"


class ShapeMismatchError(PlatformError):
    code = "shape-mismatch"


class NumericError(PlatformError):
    code = "numeric-error"


class PredictError(PlatformError):
    code = "predict-error"


class EvaluationError(PlatformError):
    code = "evaluation-error"


class SearchFailedError(PlatformError):
    code = "search-failed"


class UnsupportedVersionError(PlatformError):
    code = "unsupported-version"


class ModelDecodeError(PlatformError):
    code = "decode-error"


# --- workflow engine ------------------------------------------------------

class CycleError(PlatformError):
    code = "cycle"

    def __init__(self, cycle: list[str]):
        super().__init__(f"dependency cycle: {' -> '.join(cycle)}", details=cycle)
        self.cycle = cycle


class TemplateReferenceError(PlatformError):
    code = "reference-error"


class TemplateValidationError(PlatformError):
    code = "template-invalid"

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations), details=violations)
        self.violations = violations


class BindingError(PlatformError):
    code = "binding-error"
