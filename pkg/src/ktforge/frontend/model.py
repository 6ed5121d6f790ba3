"""Frontend-agnostic code model built from parsed compilation units."""
from __future__ import annotations

import bisect
import fnmatch
import hashlib
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .lexer import Comment, LexError
from .syntax import (
    CompilationUnit,
    EnumConstant,
    FieldMember,
    MethodMember,
    ParseError,
    TypeDecl,
    parse_block,
    parse_compilation_unit,
)

DEFAULT_INCLUDES = ("**/*.java",)
DEFAULT_EXCLUDES = ("**/src/test/**",)


class ProjectError(Exception):
    """Fatal problem with the project as a whole (missing root, nothing to parse)."""


def digest_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def collapse_ws(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


@dataclass(frozen=True)
class SourceUnit:
    path: str
    text: str
    content_digest: str


@dataclass(frozen=True)
class FieldDecl:
    name: str
    declared_type: str
    visibility: str
    is_static: bool
    doc_comment: Optional[str]
    text: str


@dataclass(frozen=True)
class CallableDecl:
    id: str
    kind: str  # method | constructor
    name: str
    parameters: tuple[tuple[str, str], ...]
    return_type: str
    doc_comment: Optional[str]
    visibility: str
    is_static: bool
    body_span: Optional[tuple[int, int]]
    source_unit: str
    declaring_class: str
    decl_span: tuple[int, int]
    throws: tuple[str, ...] = ()
    is_abstract: bool = False

    @property
    def signature(self) -> str:
        mods = [] if self.visibility == "package" else [self.visibility]
        if self.is_static:
            mods.append("static")
        params = ", ".join(f"{t} {n}" for n, t in self.parameters)
        if self.kind == "constructor":
            head = f"{self.name}({params})"
        else:
            head = f"{self.return_type} {self.name}({params})"
        text = " ".join(mods + [head])
        if self.throws:
            text += " throws " + ", ".join(self.throws)
        return text


@dataclass(frozen=True)
class ClassRecord:
    qualified_name: str
    package: str
    kind: str  # class | interface | enum
    doc_comment: Optional[str]
    fields: tuple[FieldDecl, ...]
    constructors: tuple[str, ...]
    methods: tuple[str, ...]
    source_unit: str
    visibility: str
    simple_name: str
    declaration: str
    extends: tuple[str, ...] = ()
    implements: tuple[str, ...] = ()
    imports: tuple[str, ...] = ()
    enclosing: Optional[str] = None

    def field(self, name: str) -> Optional[FieldDecl]:
        for f in self.fields:
            if f.name == name:
                return f
        return None


@dataclass(frozen=True)
class FrontendDiagnostic:
    path: str
    line: int
    message: str


@dataclass(frozen=True)
class CodeModel:
    units: dict[str, SourceUnit]
    classes: dict[str, ClassRecord]
    callables: dict[str, CallableDecl]
    diagnostics: tuple[FrontendDiagnostic, ...] = ()

    def source_of(self, decl: CallableDecl) -> str:
        start, end = decl.decl_span
        return self.units[decl.source_unit].text[start:end]


def type_key(type_text: str) -> str:
    return type_text.replace(", ", ",")


def callable_id(class_qn: str, name: str, param_types: Iterable[str]) -> str:
    return f"{class_qn}#{name}({','.join(type_key(t) for t in param_types)})"


def strip_doc(text: str) -> Optional[str]:
    body = text[3:-2]
    lines = [re.sub(r"^\s*\*?\s?", "", line, count=1).rstrip() for line in body.splitlines()]
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines) or None


class _DocFinder:
    def __init__(self, cu: CompilationUnit):
        self.comments: list[Comment] = cu.comments
        self.comment_starts = [c.start for c in cu.comments]
        self.token_starts = [t.start for t in cu.tokens]
        self.tokens = cu.tokens

    def doc_for(self, start: int, head: int) -> Optional[str]:
        """Doc block adjacent to a declaration spanning annotations ``start`` .. ``head``."""
        ti = bisect.bisect_left(self.token_starts, start)
        prev_end = self.tokens[ti - 1].end if ti > 0 else 0
        lo = bisect.bisect_left(self.comment_starts, prev_end)
        hi = bisect.bisect_left(self.comment_starts, head)
        candidates = [c for c in self.comments[lo:hi] if c.end <= head]
        if not candidates:
            return None
        last = candidates[-1]
        return strip_doc(last.text) if last.kind == "doc" else None


def build_units(path: str, text: str) -> tuple[list[ClassRecord], list[CallableDecl]]:
    """Parse one file into records. Raises ParseError/LexError on bad syntax."""
    cu = parse_compilation_unit(text)
    docs = _DocFinder(cu)
    imports = tuple(("static " if imp.is_static else "") + imp.name for imp in cu.imports)
    classes: list[ClassRecord] = []
    callables: list[CallableDecl] = []

    def visit(decl: TypeDecl, enclosing: Optional[ClassRecord], in_interface: bool) -> None:
        chain = decl.name if enclosing is None else f"{enclosing.qualified_name}.{decl.name}"
        qn = chain if enclosing is not None or not cu.package else f"{cu.package}.{decl.name}"
        kind = {"annotation": "interface", "record": "class"}.get(decl.kind, decl.kind)
        is_iface = kind == "interface"
        fields: list[FieldDecl] = []
        ctor_ids: list[str] = []
        method_ids: list[str] = []
        nested: list[TypeDecl] = []
        for member in decl.members:
            if isinstance(member, FieldMember):
                vis = _visibility(member.modifiers, "public" if is_iface else "package")
                field_doc = docs.doc_for(member.start, member.head)
                member_text = collapse_ws(text[member.head : member.end])
                for d in member.declarators:
                    fields.append(
                        FieldDecl(d.name, member.type_text, vis, "static" in member.modifiers or is_iface, field_doc, member_text)
                    )
            elif isinstance(member, EnumConstant):
                fields.append(
                    FieldDecl(member.name, decl.name, "public", True, docs.doc_for(member.start, member.head), collapse_ws(text[member.head : member.end]))
                )
            elif isinstance(member, MethodMember):
                param_types = [p.type_text for p in member.params]
                if member.is_constructor:
                    cid = callable_id(qn, "<init>", param_types)
                    default_vis = "private" if kind == "enum" else "package"
                    ctor_ids.append(cid)
                else:
                    cid = callable_id(qn, member.name, param_types)
                    default_vis = "public" if is_iface else "package"
                    method_ids.append(cid)
                body = member.body_span
                if body is not None:
                    parse_block(text, body)
                callables.append(
                    CallableDecl(
                        id=cid,
                        kind="constructor" if member.is_constructor else "method",
                        name=member.name,
                        parameters=tuple((p.name, p.type_text) for p in member.params),
                        return_type=qn.rsplit(".", 1)[-1] if member.is_constructor else member.return_type,
                        doc_comment=docs.doc_for(member.start, member.head),
                        visibility=_visibility(member.modifiers, default_vis),
                        is_static="static" in member.modifiers,
                        body_span=body,
                        source_unit=path,
                        declaring_class=qn,
                        decl_span=(member.head, member.end),
                        throws=tuple(member.throws),
                        is_abstract=body is None,
                    )
                )
            elif isinstance(member, TypeDecl):
                nested.append(member)
        header = text[decl.head : decl.body_start]
        record = ClassRecord(
            qualified_name=qn,
            package=cu.package,
            kind=kind,
            doc_comment=docs.doc_for(decl.start, decl.head),
            fields=tuple(fields),
            constructors=tuple(ctor_ids),
            methods=tuple(method_ids),
            source_unit=path,
            visibility=_visibility(decl.modifiers, "public" if in_interface else "package"),
            simple_name=decl.name,
            declaration=collapse_ws(header),
            extends=tuple(decl.extends),
            implements=tuple(decl.implements),
            imports=imports,
            enclosing=enclosing.qualified_name if enclosing else None,
        )
        classes.append(record)
        for inner in nested:
            visit(inner, record, is_iface)

    for top in cu.types:
        visit(top, None, False)
    return classes, callables


def _visibility(mods: frozenset[str], default: str) -> str:
    for vis in ("public", "protected", "private"):
        if vis in mods:
            return vis
    return default


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, max(0, offset)) + 1


def collect_files(root: Path, includes: Iterable[str], excludes: Iterable[str]) -> list[Path]:
    excludes = tuple(excludes)
    found: set[Path] = set()
    for pattern in includes:
        for p in root.glob(pattern):
            if not p.is_file():
                continue
            rel = p.relative_to(root).as_posix()
            if any(fnmatch.fnmatch(rel, ex) or fnmatch.fnmatch("/" + rel, ex) for ex in excludes):
                continue
            found.add(p)
    return sorted(found, key=lambda p: p.relative_to(root).as_posix())


def model_from_texts(texts: dict[str, str]) -> CodeModel:
    """Build a model from an in-memory mapping of relative path to source text."""
    units: dict[str, SourceUnit] = {}
    classes: dict[str, ClassRecord] = {}
    callables: dict[str, CallableDecl] = {}
    diagnostics: list[FrontendDiagnostic] = []
    for path in sorted(texts):
        text = texts[path]
        try:
            file_classes, file_callables = build_units(path, text)
        except (ParseError, LexError) as exc:
            diagnostics.append(FrontendDiagnostic(path, _line_of(text, exc.offset), str(exc)))
            continue
        clash = [c.qualified_name for c in file_classes if c.qualified_name in classes]
        clash += [c.id for c in file_callables if c.id in callables]
        if clash:
            diagnostics.append(FrontendDiagnostic(path, 1, f"duplicate declaration {clash[0]}"))
            continue
        ids = [c.id for c in file_callables]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            diagnostics.append(FrontendDiagnostic(path, 1, f"duplicate declaration {dup}"))
            continue
        units[path] = SourceUnit(path, text, digest_text(text))
        classes.update((c.qualified_name, c) for c in file_classes)
        callables.update((c.id, c) for c in file_callables)
    return CodeModel(units, classes, callables, tuple(diagnostics))


def parse_project(
    root: str | Path,
    includes: Iterable[str] = DEFAULT_INCLUDES,
    excludes: Iterable[str] = DEFAULT_EXCLUDES,
) -> CodeModel:
    root = Path(root)
    if not root.is_dir():
        raise ProjectError(f"project root not found: {root}")
    files = collect_files(root, includes, excludes)
    if not files:
        raise ProjectError(f"no source files matched under {root}")
    texts = {p.relative_to(root).as_posix(): p.read_text(encoding="utf-8") for p in files}
    return model_from_texts(texts)


def extract_doc(entity: ClassRecord | CallableDecl) -> Optional[str]:
    return entity.doc_comment
