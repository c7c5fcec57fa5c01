"""Tokenizer for Continuette source text."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import LexError, Span

KEYWORDS = {
    "module", "void", "event", "sends", "send", "expect", "catch",
    "final", "required", "throw", "return", "new", "if", "else",
    "while", "print", "null", "true", "false",
}

# Lexed as identifiers; the parser rejects declaring members with these names.
RESERVED_TYPE_NAMES = {"int", "bool", "string", "Object", "ContinuityError"}

_PUNCT2 = ("==", "!=", "<=", ">=", "&&", "||")
_PUNCT1 = "{}(),;.=<>+-*/%"


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "str" | "eof" | the keyword/punct lexeme itself
    text: str
    span: Span

    def __repr__(self):
        return f"Token({self.kind}:{self.text!r}@{self.span.start})"


_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


def tokenize(source: str) -> list[Token]:
    """Tokenize source into a list ending with an eof token."""
    toks: list[Token] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c == "/" and source[i : i + 2] == "//":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = word if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, Span(i, j)))
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and source[j].isdigit():
                j += 1
            toks.append(Token("int", source[i:j], Span(i, j)))
            i = j
            continue
        if c == '"':
            j = i + 1
            chars: list[str] = []
            while True:
                if j >= n or source[j] == "\n":
                    raise LexError("unterminated string literal", Span(i, min(j, n)))
                ch = source[j]
                if ch == '"':
                    j += 1
                    break
                if ch == "\\":
                    if j + 1 >= n or source[j + 1] not in _ESCAPES:
                        raise LexError("bad escape sequence", Span(j, j + 2))
                    chars.append(_ESCAPES[source[j + 1]])
                    j += 2
                    continue
                chars.append(ch)
                j += 1
            toks.append(Token("str", "".join(chars), Span(i, j)))
            i = j
            continue
        two = source[i : i + 2]
        if two in _PUNCT2:
            toks.append(Token(two, two, Span(i, i + 2)))
            i += 2
            continue
        if c in _PUNCT1:
            toks.append(Token(c, c, Span(i, i + 1)))
            i += 1
            continue
        raise LexError(f"unrecognizable character {c!r}", Span(i, i + 1))
    toks.append(Token("eof", "", Span(n, n)))
    return toks
