"""Tokenizer shared by every DSL entry point."""
from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"

    def to(self, other: "Span") -> "Span":
        return Span(self.file, self.line, self.col, other.end_line, other.end_col)


class ParseError(Exception):
    def __init__(self, span: Span, expected, msg: str | None = None):
        self.span = span
        self.expected = frozenset(expected)
        self.msg = msg
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.msg:
            return f"{self.span}: {self.msg}"
        exp = ", ".join(sorted(self.expected))
        return f"{self.span}: expected one of {{{exp}}}"


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | sym | eof
    text: str
    span: Span


_SYMS = ["(+)", "->", "~>", "==", "!=", "<=", ">=", "{", "}", "(", ")", ",", ".", "<", ">",
         ":", ";", "!", "?", "&", "+", "-", "*", "="]
_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>(#|//)[^\n]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<int>[0-9]+)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in _SYMS) + ")"
)


def tokenize(src: str, file: str = "<input>") -> list[Token]:
    toks = []
    line, col, pos = 1, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            sp = Span(file, line, col, line, col + 1)
            raise ParseError(sp, [], f"unexpected character {src[pos]!r}")
        text = m.group()
        kind = m.lastgroup
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                toks.append(Token(kind, text, Span(file, line, col, line, col + len(text))))
            col += len(text)
        pos = m.end()
    toks.append(Token("eof", "", Span(file, line, col, line, col)))
    return toks


class TokenStream:
    def __init__(self, src: str, file: str = "<input>"):
        self.toks = tokenize(src, file)
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def at(self, text: str, ahead: int = 0) -> bool:
        t = self.peek(ahead)
        return t.kind in ("sym", "ident") and t.text == text

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(self.peek().span, [text])
        return self.next()

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "ident" or t.text in KEYWORDS:
            raise ParseError(t.span, [what])
        return self.next()

    def eof(self) -> None:
        if self.peek().kind != "eof":
            raise ParseError(self.peek().span, ["end of input"])


KEYWORDS = {"rec", "end", "eps", "sum", "if", "then", "else", "true", "false", "nondet", "unit"}
