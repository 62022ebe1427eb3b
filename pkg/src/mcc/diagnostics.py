"""Diagnostics shared by every stage of the pipeline."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class Span:
    line: int = 0
    column: int = 0
    end_line: int = 0
    end_column: int = 0
    source: str = ""

    def __str__(self) -> str:
        where = self.source or "<input>"
        if not self.line:
            return where
        return f"{where}:{self.line}:{self.column}"

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "line": self.line,
            "column": self.column,
            "end_line": self.end_line,
            "end_column": self.end_column,
        }


NO_SPAN = Span()


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    location: Span = NO_SPAN
    related: Span | None = field(default=None)

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def __str__(self) -> str:
        return f"{self.location}: {self.severity.value}[{self.code}]: {self.message}"

    def to_json(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "message": self.message,
            "location": self.location.to_json(),
            "related": self.related.to_json() if self.related else None,
        }


def error(code: str, message: str, location: Span = NO_SPAN, related: Span | None = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, location, related)


def warning(code: str, message: str, location: Span = NO_SPAN, related: Span | None = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, location, related)


def info(code: str, message: str, location: Span = NO_SPAN, related: Span | None = None) -> Diagnostic:
    return Diagnostic(Severity.INFO, code, message, location, related)


def has_errors(diagnostics) -> bool:
    return any(d.is_error for d in diagnostics)


_COLORS = {Severity.ERROR: "\x1b[31m", Severity.WARNING: "\x1b[33m", Severity.INFO: "\x1b[36m"}


def format_diagnostic(diag: Diagnostic, color: bool | None = None) -> str:
    """Render one diagnostic; coloring follows ``MCC_COLOR`` unless forced."""
    if color is None:
        color = os.environ.get("MCC_COLOR", "").lower() in ("1", "true", "yes", "always")
    text = str(diag)
    if color:
        return f"{_COLORS[diag.severity]}{text}\x1b[0m"
    return text
