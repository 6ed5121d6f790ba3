"""Tokenizer for Java source text.

Tokens keep absolute character offsets so every later stage can slice the
original text. Comments are not tokens; they are returned on the side so
documentation can be attached by adjacency.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple

KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized this
    throw throws transient try void volatile while true false null""".split()
)

PRIMITIVES = frozenset("boolean byte char short int long float double void".split())

# Longest first. '>>' and '>>>' are deliberately absent: they are emitted as
# separate '>' tokens so nested generic arguments close cleanly.
_OPERATORS = sorted(
    """<<= >= <= == != && || ++ -- += -= *= /= %= &= |= ^= <<
    -> :: ... ( ) { } [ ] ; , . @ = > < ! ~ ? : + - * / & | ^ %""".split(),
    key=len,
    reverse=True,
)

_NUMBER = re.compile(
    r"""
    0[xX][0-9a-fA-F_]*(?:\.[0-9a-fA-F_]*)?(?:[pP][+-]?\d+)?[lLfFdD]?
  | 0[bB][01_]+[lL]?
  | (?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][+-]?\d+)?[lLfFdD]?
    """,
    re.VERBOSE,
)
_IDENT = re.compile(r"(?:[^\W\d]|\$)[\w$]*", re.UNICODE)
_OPERATOR = re.compile("|".join(re.escape(op) for op in _OPERATORS))  # alternation order = longest first
_SPACE = re.compile(r"\s+")


class LexError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class Token(NamedTuple):  # a tuple: lexing creates many of these
    kind: str  # ident | keyword | literal | op
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Comment:
    kind: str  # doc | block | line
    text: str
    start: int
    end: int


def tokenize(source: str, start: int = 0, end: int | None = None) -> tuple[list[Token], list[Comment]]:
    """Lex ``source[start:end]``; offsets stay absolute."""
    tokens: list[Token] = []
    comments: list[Comment] = []
    i, n = start, len(source) if end is None else end
    while i < n:
        ch = source[i]
        if ch.isspace():
            i = _SPACE.match(source, i, n).end()
            continue
        if ch == "/" and source.startswith("//", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            comments.append(Comment("line", source[i:j], i, j))
            i = j
            continue
        if ch == "/" and source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise LexError("unterminated comment", i)
            kind = "doc" if source.startswith("/**", i) and not source.startswith("/**/", i) else "block"
            comments.append(Comment(kind, source[i : j + 2], i, j + 2))
            i = j + 2
            continue
        if ch == '"' and source.startswith('"""', i):
            j = source.find('"""', i + 3)
            while j > 0 and _escaped(source, j):
                j = source.find('"""', j + 1)
            if j < 0:
                raise LexError("unterminated text block", i)
            tokens.append(Token("literal", source[i : j + 3], i, j + 3))
            i = j + 3
            continue
        if ch in "\"'":
            j = i + 1
            while j < n and source[j] != ch:
                if source[j] == "\\":
                    j += 1
                elif source[j] == "\n":
                    raise LexError("unterminated literal", i)
                j += 1
            if j >= n:
                raise LexError("unterminated literal", i)
            tokens.append(Token("literal", source[i : j + 1], i, j + 1))
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            m = _NUMBER.match(source, i)
            tokens.append(Token("literal", m.group(), i, m.end()))
            i = m.end()
            continue
        m = _IDENT.match(source, i)
        if m:
            word = m.group()
            kind = "keyword" if word in KEYWORDS else "ident"
            if word in ("true", "false", "null"):
                kind = "literal"
            tokens.append(Token(kind, word, i, m.end()))
            i = m.end()
            continue
        m = _OPERATOR.match(source, i, n)
        if m is None:
            raise LexError(f"unexpected character {ch!r}", i)
        tokens.append(Token("op", m.group(), i, m.end()))
        i = m.end()
    return tokens, comments


def _escaped(source: str, j: int) -> bool:
    k, count = j - 1, 0
    while k >= 0 and source[k] == "\\":
        count += 1
        k -= 1
    return count % 2 == 1
