"""Exception hierarchy.

Each family maps onto one CLI exit code: configuration/usage problems exit 1,
bad input data exits 2, failures of an external service exit 3.
"""

from __future__ import annotations


class PolarError(Exception):
    exit_code = 1


class ConfigError(PolarError, ValueError):
    exit_code = 1


class DataValidationError(PolarError, ValueError):
    exit_code = 2


class ParseError(DataValidationError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")
        self.path = path
        self.line = line


class DuplicateIdError(DataValidationError):
    def __init__(self, sample_id: str, line: int | None = None):
        suffix = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate id {sample_id!r}{suffix}")
        self.sample_id = sample_id


class UnknownLanguageError(DataValidationError):
    def __init__(self, code: str):
        super().__init__(f"unknown language code {code!r}")
        self.code = code


class MissingPredictionError(DataValidationError):
    def __init__(self, missing: list[str]):
        shown = ", ".join(missing[:20])
        more = f" (+{len(missing) - 20} more)" if len(missing) > 20 else ""
        super().__init__(f"{len(missing)} sample id(s) lack a prediction: {shown}{more}")
        self.missing = list(missing)


class ServiceError(PolarError, RuntimeError):
    """An external endpoint failed or returned something unusable."""

    exit_code = 3


class TransportError(ServiceError):
    def __init__(self, message: str, status: int | None = None, attempts: int = 1):
        super().__init__(message)
        self.status = status
        self.attempts = attempts


class EmptyCompletionError(ServiceError):
    pass


class ContrastiveFormatError(ServiceError, ValueError):
    pass


class TranslationError(ServiceError):
    def __init__(self, message: str, hop: int):
        super().__init__(f"hop {hop}: {message}")
        self.hop = hop


class EmbeddingError(ServiceError):
    pass
