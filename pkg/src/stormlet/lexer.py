"""Tokenizer shared by the PRISM-subset and property parsers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError

IDENT = "ident"
INT = "int"
DECIMAL = "decimal"
STRING = "string"
SYMBOL = "symbol"
EOF = "eof"

# longest match first
_SYMBOLS = (
    "<=>",
    "=>",
    "..",
    "<=",
    ">=",
    "!=",
    "->",
    "(",
    ")",
    "[",
    "]",
    "{",
    "}",
    ";",
    ":",
    ",",
    "'",
    "=",
    "<",
    ">",
    "!",
    "&",
    "|",
    "?",
    "+",
    "-",
    "*",
    "/",
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    value: object
    line: int
    column: int

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}@{self.line}:{self.column})"

    def renamed(self, name: str) -> "Token":
        return Token(self.kind, name, name, self.line, self.column)


def tokenize(text: str) -> list[Token]:
    """Lex ``text`` into tokens; ``//`` starts a line comment."""
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string", line, col)
                j += 1
            if j >= n:
                raise ParseError("unterminated string", line, col)
            value = text[i + 1 : j]
            tokens.append(Token(STRING, text[i : j + 1], value, line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    # '..' is the range symbol, not part of a number
                    if j + 1 < n and text[j + 1] == ".":
                        break
                    seen_dot = True
                j += 1
            exp = 0
            mantissa = text[i:j]
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    m = k
                    while m < n and text[m].isdigit():
                        m += 1
                    exp = int(text[j + 1 : m])
                    j = m
            raw = text[i:j]
            if seen_dot or exp != 0:
                if seen_dot:
                    whole, frac = mantissa.split(".")
                    base = Fraction(int((whole or "0") + frac), 10 ** len(frac))
                else:
                    base = Fraction(int(mantissa))
                value = base * Fraction(10) ** exp
                tokens.append(Token(DECIMAL, raw, value, line, col))
            else:
                tokens.append(Token(INT, raw, int(raw), line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i:j]
            tokens.append(Token(IDENT, name, name, line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(SYMBOL, sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token(EOF, "", None, line, col))
    return tokens


class TokenStream:
    """Cursor over a token list with error reporting helpers."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def at(self, *texts: str) -> bool:
        tok = self.current
        return tok.kind != EOF and tok.text in texts

    def at_kind(self, kind: str) -> bool:
        return self.current.kind == kind

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def accept(self, *texts: str) -> Token | None:
        if self.at(*texts):
            return self.advance()
        return None

    def expect(self, *texts: str) -> Token:
        if self.at(*texts):
            return self.advance()
        tok = self.current
        raise ParseError(
            f"unexpected {tok.text!r}" if tok.kind != EOF else "unexpected end of input",
            tok.line,
            tok.column,
            expected=texts,
        )

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.current.kind == kind:
            return self.advance()
        tok = self.current
        raise ParseError(
            f"unexpected {tok.text!r}" if tok.kind != EOF else "unexpected end of input",
            tok.line,
            tok.column,
            expected=(what,),
        )

    def error(self, message: str, expected=()) -> ParseError:
        tok = self.current
        return ParseError(message, tok.line, tok.column, expected=expected)
