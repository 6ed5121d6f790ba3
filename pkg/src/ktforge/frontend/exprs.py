"""Token-level facts about Java expressions.

Nothing here builds an expression tree. We recover just enough structure to
answer: which calls happen and on what receiver chain, which fields are
selected, and which local names are read or written.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lexer import KEYWORDS, PRIMITIVES, Token
from .syntax import normalize_type

ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<=".split())
_TYPE_ARG_TOKENS = frozenset({",", ".", "?", "&", "[", "]", "extends", "super", "@"})


@dataclass
class Segment:
    """One link of a receiver chain such as ``a.b().c[0]``."""

    kind: str  # name | this | super | new | call | field | index | paren | cast | literal | other
    text: str = ""
    nargs: int = 0
    inner: Optional[list["Segment"]] = None


@dataclass
class CallSite:
    name: str  # method name; type text for constructor calls
    kind: str  # method | new | this | super
    receiver: Optional[list[Segment]]
    args: list[tuple[int, int]]
    start: int
    end: int
    name_index: int
    arg_literals: list[Optional[str]] = field(default_factory=list)


@dataclass
class FieldSelect:
    name: str
    receiver: list[Segment]
    start: int
    end: int


@dataclass
class ExprFacts:
    calls: list[CallSite] = field(default_factory=list)
    selects: list[FieldSelect] = field(default_factory=list)
    names: list[tuple[str, int]] = field(default_factory=list)  # bare reads: (name, token index)
    assigned: list[tuple[str, bool]] = field(default_factory=list)  # (name, also read)
    declared: list[tuple[str, str]] = field(default_factory=list)  # pattern bindings: (name, type)

    def read_names(self) -> set[str]:
        return {name for name, _ in self.names}


class TokenView:
    """Token list with cached bracket matching."""

    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.match: dict[int, int] = {}
        stack: list[int] = []
        for i, tok in enumerate(tokens):
            if tok.text in "([{" and tok.kind == "op":
                stack.append(i)
            elif tok.text in ")]}" and tok.kind == "op" and stack:
                j = stack.pop()
                self.match[i] = j
                self.match[j] = i

    def text(self, i: int) -> str:
        return self.toks[i].text if 0 <= i < len(self.toks) else ""

    def skip_type_args(self, i: int, hi: int) -> Optional[int]:
        """If a type-argument list opens at ``i``, return the index just past it."""
        if self.text(i) != "<":
            return None
        depth = 0
        k = i
        while k < hi:
            tok = self.toks[k]
            if tok.text == "<":
                depth += 1
            elif tok.text == ">":
                depth -= 1
                if depth == 0:
                    return k + 1
            elif not (tok.kind == "ident" or tok.text in PRIMITIVES or tok.text in _TYPE_ARG_TOKENS):
                return None
            k += 1
        return None

    def split_args(self, open_i: int) -> list[tuple[int, int]]:
        close = self.match[open_i]
        if close == open_i + 1:
            return []
        out: list[tuple[int, int]] = []
        depth = 0
        begin = open_i + 1
        k = begin
        while k < close:
            tok = self.toks[k]
            if tok.text in "([{":
                depth += 1
            elif tok.text in ")]}":
                depth -= 1
            elif tok.text == "<" and self.toks[k - 1].kind == "ident":
                past = self.skip_type_args(k, close)
                if past is not None:
                    k = past
                    continue
            elif tok.text == "," and depth == 0:
                out.append((begin, k))
                begin = k + 1
            k += 1
        out.append((begin, close))
        return out

    # -- receiver chains ---------------------------------------------------

    def chain_start(self, j: int, lo: int) -> int:
        """Walk back from token ``j`` (last token of a receiver) to its first token."""
        while True:
            t = self.text(j)
            if t in (")", "]") and j in self.match:
                o = self.match[j]
                if t == "]":
                    j = o - 1
                    if j < lo:
                        return o
                    continue
                before = o - 1
                if before >= lo and self.text(before) == ">":
                    k = before
                    depth = 0
                    while k >= lo:
                        if self.text(k) == ">":
                            depth += 1
                        elif self.text(k) == "<":
                            depth -= 1
                            if depth == 0:
                                break
                        k -= 1
                    if k > lo and self.toks[k - 1].kind == "ident":
                        j = k - 1
                    else:
                        j = o
                elif before >= lo and (self.toks[before].kind == "ident" or self.text(before) in ("this", "super")):
                    j = before
                else:
                    j = o
            if j - 1 >= lo and self.text(j - 1) == ".":
                j -= 2
                if j >= lo and self.text(j) == ">":
                    # obj.<T>method(): skip the explicit type arguments
                    k = j
                    while k >= lo and self.text(k) != "<":
                        k -= 1
                    j = k - 2 if k - 1 >= lo and self.text(k - 1) == "." else k
                continue
            if j - 1 >= lo and self.text(j - 1) == "new":
                j -= 1
            return j

    def segments(self, a: int, b: int) -> list[Segment]:
        """Forward-parse the receiver chain occupying tokens ``a..b`` inclusive."""
        segs: list[Segment] = []
        k = a
        tok = self.toks[k]
        if tok.text == "new":
            k, type_text = self.type_at(k + 1, b + 1)
            if self.text(k) == "(" and k in self.match:
                segs.append(Segment("new", type_text, len(self.split_args(k))))
                k = self.match[k] + 1
                if self.text(k) == "{" and k in self.match:
                    k = self.match[k] + 1
            else:
                segs.append(Segment("other", type_text))
                while self.text(k) == "[" and k in self.match:
                    k = self.match[k] + 1
        elif tok.text == "(" and k in self.match:
            close = self.match[k]
            inner_a, inner_b = k + 1, close - 1
            if self.text(inner_a) == "(" and inner_a in self.match:
                cast_close = self.match[inner_a]
                end, type_text = self.type_at(inner_a + 1, cast_close)
                if end == cast_close and type_text:
                    segs.append(Segment("cast", type_text))
                else:
                    segs.append(Segment("paren", inner=self.segments(inner_a, inner_b) if inner_b >= inner_a else []))
            elif inner_b >= inner_a:
                segs.append(Segment("paren", inner=self.segments(inner_a, inner_b)))
            else:
                segs.append(Segment("other"))
            k = close + 1
        elif tok.kind == "ident":
            if self.text(k + 1) == "(" and k + 1 in self.match:
                segs.append(Segment("call", tok.text, len(self.split_args(k + 1))))
                k = self.match[k + 1] + 1
            else:
                segs.append(Segment("name", tok.text))
                k += 1
        elif tok.text in ("this", "super"):
            segs.append(Segment(tok.text, tok.text))
            k += 1
        elif tok.kind == "literal":
            segs.append(Segment("literal", tok.text))
            k += 1
        else:
            segs.append(Segment("other", tok.text))
            k += 1
        while k <= b:
            t = self.text(k)
            if t == "." and k + 1 <= b:
                k += 1
                if self.text(k) == "<":
                    past = self.skip_type_args(k, b + 1)
                    k = past if past is not None else k + 1
                nxt = self.toks[k]
                if nxt.kind == "ident" and self.text(k + 1) == "(" and k + 1 in self.match:
                    segs.append(Segment("call", nxt.text, len(self.split_args(k + 1))))
                    k = self.match[k + 1] + 1
                elif nxt.kind == "ident":
                    segs.append(Segment("field", nxt.text))
                    k += 1
                else:
                    segs.append(Segment("other", nxt.text))
                    k += 1
            elif t == "[" and k in self.match:
                segs.append(Segment("index"))
                k = self.match[k] + 1
            else:
                break
        return segs

    def type_at(self, k: int, hi: int) -> tuple[int, str]:
        while self.text(k) == "@" and k + 1 < hi:
            k += 2
            if self.text(k) == "(" and k in self.match:
                k = self.match[k] + 1
        type_start = k
        if k < hi and (self.toks[k].kind == "ident" or self.text(k) in PRIMITIVES):
            k += 1
            past = self.skip_type_args(k, hi)
            if past is not None:
                k = past
            while self.text(k) == "." and k + 1 < hi and self.toks[k + 1].kind == "ident":
                k += 2
                past = self.skip_type_args(k, hi)
                if past is not None:
                    k = past
            while self.text(k) == "[" and self.text(k + 1) == "]":
                k += 2
        return k, normalize_type(self.toks[type_start:k])


def analyze(view: TokenView, lo: int, hi: int) -> ExprFacts:
    """Collect calls, field selections and name reads/writes in tokens [lo, hi)."""
    facts = ExprFacts()
    toks = view.toks
    lambda_params: set[int] = set()
    for i in range(lo, hi):
        if toks[i].text == "->":
            if i - 1 >= lo and toks[i - 1].kind == "ident":
                lambda_params.add(i - 1)
            elif i - 1 >= lo and toks[i - 1].text == ")" and (i - 1) in view.match:
                for k in range(view.match[i - 1] + 1, i - 1):
                    if toks[k].kind == "ident":
                        lambda_params.add(k)
    i = lo
    while i < hi:
        tok = toks[i]
        prev = view.text(i - 1) if i - 1 >= lo else ""
        nxt = view.text(i + 1) if i + 1 < hi else ""
        if tok.text == "new":
            k, type_text = view.type_at(i + 1, hi)
            if view.text(k) == "(" and k in view.match:
                close = view.match[k]
                args = view.split_args(k)
                facts.calls.append(CallSite(type_text, "new", None, args, tok.start, toks[close].end, i, _literals(view, args)))
            i = k
            continue
        if tok.text == "instanceof":
            k, type_text = view.type_at(i + 1, hi)
            if k < hi and toks[k].kind == "ident" and view.text(k + 1) not in ("(", "."):
                facts.declared.append((toks[k].text, type_text))
                k += 1
            i = k
            continue
        if tok.text in ("this", "super") and nxt == "(" and prev != "." and (i + 1) in view.match:
            close = view.match[i + 1]
            args = view.split_args(i + 1)
            facts.calls.append(CallSite(tok.text, tok.text, None, args, tok.start, toks[close].end, i, _literals(view, args)))
            i += 1
            continue
        if tok.kind == "ident" and nxt == "(" and prev != "::" and (i + 1) in view.match:
            close = view.match[i + 1]
            args = view.split_args(i + 1)
            receiver = None
            start = tok.start
            dot = _receiver_dot(view, i, lo)
            if dot is not None:
                first = view.chain_start(dot - 1, lo)
                receiver = view.segments(first, dot - 1)
                start = toks[first].start
            facts.calls.append(CallSite(tok.text, "method", receiver, args, start, toks[close].end, i, _literals(view, args)))
            i += 1
            continue
        if tok.text == "." and i + 1 < hi and toks[i + 1].kind == "ident" and view.text(i + 2) != "(" and i - 1 >= lo:
            first = view.chain_start(i - 1, lo)
            receiver = view.segments(first, i - 1)
            facts.selects.append(FieldSelect(toks[i + 1].text, receiver, toks[first].start, toks[i + 1].end))
            i += 2
            continue
        if tok.kind == "ident" and prev != "." and prev != "::" and i not in lambda_params:
            if nxt == "." and _looks_like_type(tok.text):
                i += 1
                continue
            op = view.text(i + 1) if i + 1 < hi else ""
            if op in ASSIGN_OPS:
                facts.assigned.append((tok.text, op != "="))
                if op != "=":
                    facts.names.append((tok.text, i))
            elif op in ("++", "--") or (prev in ("++", "--") and not _operand_before(view, i - 2, lo)):
                facts.assigned.append((tok.text, True))
                facts.names.append((tok.text, i))
            elif op == "[" and (i + 1) in view.match and _is_assign_target(view, view.match[i + 1] + 1, hi):
                facts.assigned.append((tok.text, True))
                facts.names.append((tok.text, i))
            else:
                facts.names.append((tok.text, i))
        i += 1
    return facts


def _receiver_dot(view: TokenView, name_i: int, lo: int) -> Optional[int]:
    prev = name_i - 1
    if prev < lo:
        return None
    if view.text(prev) == ".":
        return prev
    if view.text(prev) == ">":
        k = prev
        while k >= lo and view.text(k) != "<":
            k -= 1
        if k - 1 >= lo and view.text(k - 1) == ".":
            return k - 1
    return None


def _is_assign_target(view: TokenView, k: int, hi: int) -> bool:
    return k < hi and view.text(k) in ASSIGN_OPS


def _operand_before(view: TokenView, k: int, lo: int) -> bool:
    """True when the token at ``k`` ends an operand, making '++' postfix of it."""
    if k < lo:
        return False
    tok = view.toks[k]
    return tok.kind in ("ident", "literal") or tok.text in (")", "]")


def _looks_like_type(name: str) -> bool:
    return name[:1].isupper()


def _literals(view: TokenView, args: list[tuple[int, int]]) -> list[Optional[str]]:
    """Literal kind per argument where it is a single literal token, else None."""
    out: list[Optional[str]] = []
    for a, b in args:
        if b - a == 1 and view.toks[a].kind == "literal":
            out.append(literal_type(view.toks[a].text))
        elif b - a == 2 and view.text(a) == "-" and view.toks[a + 1].kind == "literal":
            out.append(literal_type(view.toks[a + 1].text))
        else:
            out.append(None)
    return out


def literal_type(text: str) -> Optional[str]:
    if text.startswith('"'):
        return "String"
    if text.startswith("'"):
        return "char"
    if text in ("true", "false"):
        return "boolean"
    if text == "null":
        return None
    low = text.lower()
    if low.endswith("l") and not low.startswith("0x"):
        return "long"
    if low.endswith("f") and not low.startswith("0x"):
        return "float"
    if "." in text or low.endswith("d") or ("e" in low and not low.startswith("0x")):
        return "double"
    return "int"


def is_keyword(text: str) -> bool:
    return text in KEYWORDS
