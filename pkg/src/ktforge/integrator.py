"""Merges a test-class framework and generated members into one test class.

Three rules apply, in this order of precedence: lifecycle methods of the same
kind have their bodies merged; same-named test or helper methods are deduped
by keeping the longer body; everything else is appended.
"""
from __future__ import annotations

import re
import textwrap
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .frontend import syntax as js
from .frontend.lexer import LexError
from .frontend.model import collapse_ws

LIFECYCLE_KINDS = {
    "BeforeEach": "before-each", "Before": "before-each",
    "BeforeAll": "before-all", "BeforeClass": "before-all",
    "AfterEach": "after-each", "After": "after-each",
    "AfterAll": "after-all", "AfterClass": "after-all",
}
TEST_ANNOTATIONS = frozenset({"Test", "ParameterizedTest", "RepeatedTest", "TestFactory", "TestTemplate"})
_IMPORT_LINE = re.compile(r"^\s*import\s+(static\s+)?([\w$.]+(?:\.\*)?)\s*;\s*$", re.MULTILINE)
_PACKAGE_LINE = re.compile(r"^\s*package\s+[\w.]+\s*;\s*$", re.MULTILINE)
INDENT = "    "


@dataclass(frozen=True)
class IntegrationDiagnostic:
    source_index: int  # position in the incoming method list
    message: str


@dataclass
class Member:
    category: str  # field | lifecycle | test | helper | other
    key: str  # lifecycle kind, method/field name, or collapsed text
    annotations: tuple[str, ...]
    header: str  # collapsed declaration head; full text for fields and others
    body: Optional[str] = None  # dedented inner body text of methods

    def body_length(self) -> int:
        return len(collapse_ws(self.body or ""))

    def render(self) -> list[str]:
        lines = [INDENT + a for a in self.annotations]
        if self.body is None:
            return lines + [INDENT + line if line else "" for line in self.header.splitlines()]
        if not self.body.strip():
            return lines + [f"{INDENT}{self.header} {{", f"{INDENT}}}"]
        lines.append(f"{INDENT}{self.header} {{")
        lines += [INDENT * 2 + line if line.strip() else "" for line in self.body.splitlines()]
        lines.append(f"{INDENT}}}")
        return lines


@dataclass
class IntegrationStats:
    members_in: int = 0
    lifecycle_merged: int = 0
    deduped: int = 0
    skipped: int = 0
    appended: int = 0

    @property
    def expected_out(self) -> int:
        return self.members_in - self.lifecycle_merged - self.deduped


@dataclass
class ParsedTestClass:
    package: Optional[str]
    imports: list[str]
    annotations: tuple[str, ...]
    header: str
    members: list[Member] = field(default_factory=list)
    stats: IntegrationStats = field(default_factory=IntegrationStats)
    diagnostics: list[IntegrationDiagnostic] = field(default_factory=list)

    def find(self, category: str, key: str) -> Optional[int]:
        for i, m in enumerate(self.members):
            if m.category == category and m.key == key:
                return i
        return None

    def by_category(self, category: str) -> list[Member]:
        return [m for m in self.members if m.category == category]

    def add_import(self, imp: str) -> None:
        if imp not in self.imports:
            self.imports.append(imp)

    def add(self, member: Member) -> str:
        """Insert one member under the integration rules; returns the action taken."""
        self.stats.members_in += 1
        category = member.category
        if category == "other":
            pos = self.find("other", member.key)
            if pos is not None:
                self.stats.deduped += 1
                return "dedup"
        elif category == "field":
            pos = self.find("field", member.key)
            if pos is not None:
                self.stats.deduped += 1  # the framework's declaration wins
                return "dedup"
        else:
            pos = self.find(category, member.key)
            if pos is not None:
                existing = self.members[pos]
                if category == "lifecycle":
                    existing.body = merge_lifecycle(existing.body or "", member.body or "")
                    self.stats.lifecycle_merged += 1
                    return "merge"
                self.members[pos] = dedup_method(existing, member)
                self.stats.deduped += 1
                return "dedup"
        self.members.append(member)
        self.stats.appended += 1
        return "append"

    def render(self) -> str:
        out: list[str] = []
        if self.package:
            out += [f"package {self.package};", ""]
        # static imports first, then the rest; each group sorted
        static = sorted(i for i in self.imports if i.startswith("static "))
        plain = sorted(i for i in self.imports if not i.startswith("static "))
        for group in (static, plain):
            if group:
                out += [f"import {imp};" for imp in group]
                out.append("")
        out += list(self.annotations)
        out.append(f"{self.header} {{")
        ordered = self.by_category("field") + [m for m in self.members if m.category != "field"]
        for i, m in enumerate(ordered):
            if i and not (m.category == "field" and ordered[i - 1].category == "field"):
                out.append("")  # fields form one block; other members are spaced
            out += m.render()
        out.append("}")
        return "\n".join(out) + "\n"


class FrameworkSyntaxError(ValueError):
    pass


def _statements(body: str) -> list[str]:
    src = "{" + body + "}"
    block, _ = js.parse_block(src, (0, len(src)))
    return [_dedent_slice(src, s.start, s.end) for s in block.stmts]


def _dedent_slice(source: str, start: int, end: int) -> str:
    """Source slice with continuation lines shifted left by the slice's start column."""
    line_start = source.rfind("\n", 0, start) + 1
    prefix = source[line_start:start]
    col = len(prefix.expandtabs(4)) if not prefix.strip() else 0
    lines = source[start:end].expandtabs(4).split("\n")
    out = [lines[0]]
    for line in lines[1:]:
        strip = min(col, len(line) - len(line.lstrip(" ")))
        out.append(line[strip:].rstrip())
    return "\n".join(out)


def normalize_body(inner: str) -> str:
    text = textwrap.dedent(inner.expandtabs(4).strip("\n"))
    return "\n".join(line.rstrip() for line in text.splitlines()).strip("\n")


def merge_lifecycle(existing: str, incoming: str) -> str:
    """Append statements of ``incoming`` that are absent from ``existing``."""
    have = {collapse_ws(s) for s in _statements(existing)}
    extra = []
    for stmt in _statements(incoming):
        key = collapse_ws(stmt)
        if key not in have:
            have.add(key)
            extra.append(stmt)
    if not extra:
        return existing
    parts = [existing] if existing.strip() else []
    return "\n".join(parts + extra)


def dedup_method(existing: Member, incoming: Member) -> Member:
    """Keep whichever version has the longer whitespace-collapsed body; ties keep ``existing``."""
    return incoming if incoming.body_length() > existing.body_length() else existing


# ---------------------------------------------------------------------------
# member classification


def _annotation_names(annos: list[js.Annotation]) -> list[str]:
    return [a.name.rsplit(".", 1)[-1] for a in annos]


def classify(member, source: str) -> Member:
    if isinstance(member, js.MethodMember):
        names = _annotation_names(member.annotations)
        annos = tuple(collapse_ws(a.text) for a in member.annotations)
        body_start = member.body_span[0] if member.body_span else member.end
        header = collapse_ws(source[member.head : body_start]).rstrip(";").rstrip()
        body = normalize_body(source[member.body_span[0] + 1 : member.body_span[1] - 1]) if member.body_span else None
        kinds = [LIFECYCLE_KINDS[n] for n in names if n in LIFECYCLE_KINDS]
        if kinds and body is not None:
            return Member("lifecycle", kinds[0], annos, header, body)
        if body is None:
            return Member("other", collapse_ws(source[member.start : member.end]), (), collapse_ws(source[member.start : member.end]))
        if any(n in TEST_ANNOTATIONS for n in names):
            return Member("test", member.name, annos, header, body)
        return Member("helper", member.name, annos, header, body)
    if isinstance(member, js.FieldMember):
        text = collapse_ws(source[member.start : member.end])
        return Member("field", ",".join(d.name for d in member.declarators), (), text)
    text = normalize_body(_dedent_slice(source, member.start, member.end))
    return Member("other", collapse_ws(text), (), text)


def _split_imports(text: str) -> tuple[list[str], str]:
    imports = [("static " if m.group(1) else "") + m.group(2) for m in _IMPORT_LINE.finditer(text)]
    rest = _PACKAGE_LINE.sub("", _IMPORT_LINE.sub("", text))
    return imports, rest


def parse_members(text: str) -> tuple[list[str], list[Member]]:
    """Imports and classified members of a bare member run (raises on bad syntax)."""
    imports, rest = _split_imports(text)
    members, _ = js.parse_members(rest)
    return imports, [classify(m, rest) for m in members]


def parse_test_class(source: str) -> ParsedTestClass:
    try:
        cu = js.parse_compilation_unit(source)
    except (js.ParseError, LexError) as exc:
        raise FrameworkSyntaxError(str(exc)) from exc
    if not cu.types:
        raise FrameworkSyntaxError("no class declaration found")
    decl = cu.types[0]
    parsed = ParsedTestClass(
        package=cu.package or None,
        imports=[],
        annotations=tuple(collapse_ws(a.text) for a in decl.annotations),
        header=collapse_ws(source[decl.head : decl.body_start]),
    )
    for imp in cu.imports:
        parsed.add_import(("static " if imp.is_static else "") + imp.name)
    for member in decl.members:
        parsed.add(classify(member, source))
    return parsed


def integrate(framework: str | ParsedTestClass, methods: Iterable[str]) -> ParsedTestClass:
    """Fold generated member snippets into the framework; see :func:`render` for text."""
    parsed = parse_test_class(framework) if isinstance(framework, str) else framework
    for i, snippet in enumerate(methods):
        try:
            imports, members = parse_members(snippet)
        except (js.ParseError, LexError) as exc:
            parsed.diagnostics.append(IntegrationDiagnostic(i, f"unparseable member skipped: {exc}"))
            parsed.stats.skipped += 1
            continue
        for imp in imports:
            parsed.add_import(imp)
        for member in members:
            parsed.add(member)
    return parsed


def integrate_text(framework: str, methods: Iterable[str]) -> str:
    return integrate(framework, methods).render()
