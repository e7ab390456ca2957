from __future__ import annotations

import enum
from dataclasses import dataclass


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    line: int
    col: int
    code: str
    message: str
    end_col: int | None = None

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity.value}[{self.code}]: {self.message}"


def error(line: int, col: int, code: str, message: str, end_col: int | None = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, line, col, code, message, end_col)


def warning(line: int, col: int, code: str, message: str) -> Diagnostic:
    return Diagnostic(Severity.WARNING, line, col, code, message)


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


class ParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        super().__init__("; ".join(d.format() for d in diagnostics))
        self.diagnostics = diagnostics
