"""Spans, source bookkeeping, and the JSON-lines diagnostic format."""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    start: int
    end: int


@dataclass(frozen=True)
class Diagnostic:
    code: str
    span: Span
    message: str

    def to_json_line(self, source: "SourceText") -> str:
        file, line, col = source.locate(self.span.start)
        return json.dumps(
            {"code": self.code, "file": file, "line": line, "col": col,
             "message": self.message},
        )


class FrontendError(Exception):
    """Base for lexer/parser errors; carries a span and a diagnostic code."""

    code = "E_FRONTEND"

    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.message = message
        self.span = span

    def to_diagnostic(self) -> Diagnostic:
        return Diagnostic(self.code, self.span, self.message)


class LexError(FrontendError):
    code = "E_LEX"


class ParseError(FrontendError):
    code = "E_PARSE"

    def __init__(self, message: str, span: Span, expected: tuple[str, ...] = ()):
        if expected:
            message = f"{message} (expected one of: {', '.join(sorted(expected))})"
        super().__init__(message, span)
        self.expected = expected


class SourceText:
    """Concatenation of one or more named source files with offset mapping.

    Files join with a single newline so tokens never bleed across a file
    boundary; diagnostics map global offsets back to (file, line, col).
    """

    def __init__(self, files: list[tuple[str, str]]):
        self.files = list(files)
        parts: list[str] = []
        self._starts: list[int] = []
        pos = 0
        for _, text in self.files:
            self._starts.append(pos)
            parts.append(text)
            pos += len(text) + 1  # the joining newline
        self.text = "\n".join(parts)

    @classmethod
    def single(cls, text: str, name: str = "<source>") -> "SourceText":
        return cls([(name, text)])

    def locate(self, offset: int) -> tuple[str, int, int]:
        """Map a global byte offset to (file name, 1-based line, 1-based col)."""
        if not self.files:
            return "<none>", 1, 1
        idx = max(0, bisect_right(self._starts, offset) - 1)
        name, text = self.files[idx]
        local = min(offset - self._starts[idx], len(text))
        line = text.count("\n", 0, local) + 1
        last_nl = text.rfind("\n", 0, local)
        col = local - last_nl
        return name, line, col


def render_diagnostics(diags: list[Diagnostic], source: SourceText) -> str:
    return "\n".join(d.to_json_line(source) for d in diags)
