"""Tokenizer for the experiment-scripting language."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DslSyntaxError

KEYWORDS = frozenset({
    "if", "elif", "else", "while", "for", "in",
    "and", "or", "not", "true", "false", "null",
})

_PUNCT2 = ("==", "!=", "<=", ">=")
_PUNCT1 = "+-*/%<>=()[]{},:"


@dataclass
class Token:
    type: str   # newline | ident | keyword | number | string | op | eof
    value: object
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(source)

    def err(message, expected=""):
        return DslSyntaxError(message, line, col, expected)

    while i < n:
        ch = source[i]
        if ch == "\n":
            if tokens and tokens[-1].type not in ("newline",):
                tokens.append(Token("newline", "\n", line, col))
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            word = source[start:i]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += i - start
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            text = source[start:i]
            try:
                value = float(text)
            except ValueError:
                raise err(f"malformed number {text!r}")
            if not math.isfinite(value):
                raise err(f"number literal {text!r} overflows")
            tokens.append(Token("number", value, line, col))
            col += i - start
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            parts = []
            while True:
                if i >= n:
                    raise DslSyntaxError("unterminated string", start_line,
                                         start_col, '"')
                c = source[i]
                if c == "\n":
                    raise DslSyntaxError("newline inside string", line, col, '"')
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise err("dangling escape")
                    esc = source[i + 1]
                    mapping = {"n": "\n", "t": "\t", "r": "\r",
                               "\\": "\\", '"': '"', "/": "/"}
                    if esc in mapping:
                        parts.append(mapping[esc])
                        i += 2
                        col += 2
                        continue
                    if esc == "u":
                        hexs = source[i + 2:i + 6]
                        if len(hexs) < 4 or any(h not in "0123456789abcdefABCDEF"
                                                for h in hexs):
                            raise err("malformed \\u escape")
                        parts.append(chr(int(hexs, 16)))
                        i += 6
                        col += 6
                        continue
                    raise err(f"unknown escape \\{esc}")
                parts.append(c)
                i += 1
                col += 1
            tokens.append(Token("string", "".join(parts), start_line, start_col))
            continue
        two = source[i:i + 2]
        if two in _PUNCT2:
            tokens.append(Token("op", two, line, col))
            i += 2
            col += 2
            continue
        if ch in _PUNCT1:
            tokens.append(Token("op", ch, line, col))
            i += 1
            col += 1
            continue
        raise err(f"unexpected character {ch!r}")

    tokens.append(Token("eof", None, line, col))
    return tokens
