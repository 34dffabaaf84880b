"""Tokenizer for the guest language.

Tokens carry 1-based line/column of their first character. Comments run
from // to end of line. String escapes: \\n \\t \\" \\\\.
"""

from __future__ import annotations

from dataclasses import dataclass

from ttd.errors import GuestSyntaxError

KEYWORDS = {"let", "function", "if", "else", "while", "return", "true", "false", "null"}

# Longest first so <= beats <, && beats error, etc.
PUNCT = [
    "==", "!=", "<=", ">=", "&&", "||",
    "(", ")", "{", "}", "[", "]", ",", ";", ".", ":",
    "+", "-", "*", "/", "%", "<", ">", "=", "!",
]


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'keyword' | 'number' | 'string' | 'punct' | 'eof'
    text: str
    line: int
    col: int


def tokenize(source: str, script: str) -> list[Token]:
    toks: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def err(msg: str) -> GuestSyntaxError:
        return GuestSyntaxError(msg, script, line, col)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "keyword" if text in KEYWORDS else "ident"
            toks.append(Token(kind, text, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            toks.append(Token("number", source[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            out: list[str] = []
            while True:
                if j >= n or source[j] == "\n":
                    raise err("unterminated string literal")
                c = source[j]
                if c == '"':
                    j += 1
                    break
                if c == "\\":
                    if j + 1 >= n:
                        raise err("unterminated string escape")
                    esc = source[j + 1]
                    mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc)
                    if mapped is None:
                        raise err(f"unknown string escape \\{esc}")
                    out.append(mapped)
                    j += 2
                    continue
                out.append(c)
                j += 1
            toks.append(Token("string", "".join(out), start_line, start_col))
            col += j - i
            i = j
            continue
        for p in PUNCT:
            if source.startswith(p, i):
                toks.append(Token("punct", p, start_line, start_col))
                i += len(p)
                col += len(p)
                break
        else:
            raise err(f"unexpected character {ch!r}")
    toks.append(Token("eof", "", line, col))
    return toks
