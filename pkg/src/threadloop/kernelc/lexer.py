"""Tokenizer for kernel bodies.

Comments (``//``, ``/* */`` and ``PDL_COMMENT(...)``) are blanked out before
tokenizing so that line and column numbers still point into the original
text.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import KernelSyntaxError


@dataclass(frozen=True)
class Token:
    kind: str      # num, ident, macro, op, loopopen, loopclose, end
    value: str
    line: int
    col: int


_OPS = [
    "%{", "%}", "=>", "->", "**", "++", "--", "+=", "-=", "*=", "/=", "%=",
    "==", "!=", "<=", ">=", "&&", "||",
    "<", ">", "+", "-", "*", "/", "%", "!", "=", "(", ")", "{", "}", "[", "]",
    ",", ";", "?", ":", ".",
]

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<macro>\$[A-Za-z_]\w*)"
    r"|(?P<ident>[A-Za-z_]\w*)"
    r"|(?P<op>" + "|".join(re.escape(o) for o in _OPS) + ")"
)

_PDL_COMMENT = re.compile(r"\$?PDL_COMMENT\s*\(")


def _blank(text: str, start: int, end: int) -> str:
    chunk = "".join("\n" if c == "\n" else " " for c in text[start:end])
    return text[:start] + chunk + text[end:]


def _skip_balanced(text: str, i: int) -> int:
    """``text[i]`` is just past an opening paren; return index past its match."""
    depth = 1
    quote = None
    while i < len(text):
        c = text[i]
        if quote:
            if c == "\\":
                i += 1
            elif c == quote:
                quote = None
        elif c in "\"'":
            quote = c
        elif c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    return -1


def _line_col(text: str, pos: int):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def strip_comments(text: str) -> str:
    i = 0
    while i < len(text):
        if text.startswith("//", i):
            j = text.find("\n", i)
            j = len(text) if j < 0 else j
            text = _blank(text, i, j)
            i = j
        elif text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise KernelSyntaxError("unterminated comment", *_line_col(text, i))
            text = _blank(text, i, j + 2)
            i = j + 2
        elif text[i] in "\"'":
            # string literals only ever occur inside PDL_COMMENT
            raise KernelSyntaxError("string literals are not supported", *_line_col(text, i))
        else:
            m = _PDL_COMMENT.match(text, i)
            if m and (i == 0 or not (text[i - 1].isalnum() or text[i - 1] == "_")):
                j = _skip_balanced(text, m.end())
                if j < 0:
                    raise KernelSyntaxError("unterminated PDL_COMMENT", *_line_col(text, i))
                # swallow a trailing semicolon so the comment is a no-op
                k = j
                while k < len(text) and text[k] in " \t":
                    k += 1
                if k < len(text) and text[k] == ";":
                    j = k + 1
                text = _blank(text, i, j)
                i = j
            else:
                i += 1
    return text


def tokenize(text: str) -> list[Token]:
    text = strip_comments(text)
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise KernelSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        val = m.group()
        if kind == "ws":
            nl = val.count("\n")
            if nl:
                line += nl
                line_start = pos + val.rfind("\n") + 1
        else:
            col = pos - line_start + 1
            if kind == "op" and val == "%{":
                kind = "loopopen"
            elif kind == "op" and val == "%}":
                kind = "loopclose"
            elif kind == "num" and pos + len(val) < len(text) and \
                    (text[pos + len(val)].isalpha() or text[pos + len(val)] == "_"):
                raise KernelSyntaxError(f"malformed number {val + text[pos + len(val)]!r}", line, col)
            toks.append(Token(kind, val, line, col))
        pos = m.end()
    toks.append(Token("end", "", line, pos - line_start + 1))
    return toks
