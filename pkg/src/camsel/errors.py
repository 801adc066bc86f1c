"""Exception hierarchy shared by every subsystem.

All errors raised by this package derive from :class:`CamselError` so the CLI
and the service can map failures to exit codes / HTTP responses uniformly.
"""


class CamselError(Exception):
    """Base class for all package errors."""


class ParseError(CamselError):
    """Malformed manifest, labels file, or config; carries line/field context."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)


class IntegrityError(CamselError):
    """Data violates a structural invariant (missing camera, dim mismatch, ...)."""


class ConfigError(CamselError):
    """Invalid configuration value or combination."""


class ConflictError(CamselError):
    """Duplicate or unresolved annotation conflict."""


class VocabularyError(CamselError):
    """Detection class outside the known object vocabulary."""


class ExtractionError(CamselError):
    """Feature extraction failed for a given image reference."""


class ShapeError(CamselError):
    """Tensor shapes do not match the configured dimensions."""

    def __init__(self, expected, actual, stage: str | None = None):
        self.expected = expected
        self.actual = actual
        where = f" in {stage}" if stage else ""
        super().__init__(f"expected shape {expected}, got {actual}{where}")


class TrainingError(CamselError):
    """Training diverged or was misconfigured; carries epoch/batch context."""


class ProtocolError(CamselError):
    """Evaluation protocol preconditions violated (empty test set, leakage, ...)."""
