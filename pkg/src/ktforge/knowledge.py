"""Function-level knowledge base: one knowledge unit per method or constructor.

Dependencies are recovered syntactically and resolved by name. A call goes
into ``invoked_methods`` only when its target is an in-project callable;
everything else is kept verbatim in ``unresolved_calls``.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional

from .frontend.exprs import CallSite, Segment, TokenView, analyze
from .frontend.model import (
    CallableDecl,
    ClassRecord,
    CodeModel,
    FieldDecl,
    collapse_ws,
)
from .frontend import syntax as js

FORMAT_VERSION = 1

_NUMERIC_RANK = {"byte": 1, "short": 2, "char": 2, "int": 3, "long": 4, "float": 5, "double": 6}
_BOXES = {
    "Integer": "int", "Long": "long", "Double": "double", "Float": "float",
    "Short": "short", "Byte": "byte", "Character": "char", "Boolean": "boolean",
}


@dataclass(frozen=True)
class KnowledgeUnit:
    callable_id: str
    kind: str
    signature_text: str
    doc_comment: Optional[str]
    invoked_methods: tuple[str, ...]
    unresolved_calls: tuple[str, ...]
    accessed_fields: tuple[tuple[str, str], ...]
    containing_class: str
    visibility: str
    is_static: bool
    source_unit: str
    call_sites: tuple[tuple[str, int, int], ...]
    content_digest: str = ""

    def payload(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "content_digest"}
        data["accessed_fields"] = [list(f) for f in self.accessed_fields]
        data["call_sites"] = [list(c) for c in self.call_sites]
        data["invoked_methods"] = list(self.invoked_methods)
        data["unresolved_calls"] = list(self.unresolved_calls)
        return data


def _digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def make_unit(**kwargs) -> KnowledgeUnit:
    unit = KnowledgeUnit(**kwargs)
    return KnowledgeUnit(**{**kwargs, "content_digest": _digest(unit.payload())})


@dataclass(frozen=True)
class FunctionIndex:
    units: dict[str, KnowledgeUnit]
    classes: dict[str, ClassRecord]
    simple_name_index: dict[str, frozenset[str]]
    file_digests: dict[str, str]
    api_digest: str
    model: Optional[CodeModel] = field(default=None, compare=False, repr=False)

    def lookup_simple_class(self, name: str) -> frozenset[str]:
        return self.simple_name_index.get(name, frozenset())

    def unit(self, callable_id: str) -> KnowledgeUnit:
        return self.units[callable_id]

    def callable(self, callable_id: str) -> CallableDecl:
        if self.model is None:
            raise LookupError("index was loaded without its code model; re-index from sources")
        return self.model.callables[callable_id]


def lookup_simple_class(index: FunctionIndex, name: str) -> frozenset[str]:
    return index.lookup_simple_class(name)


# ---------------------------------------------------------------------------
# type and member resolution


@dataclass(frozen=True)
class TypeRef:
    qn: Optional[str]  # in-project class, if any
    raw: str  # base type name without generics or dims
    dims: int = 0
    static_ref: bool = False  # a class name used as a qualifier


def base_type(type_text: str) -> tuple[str, int]:
    text = re.sub(r"<.*>", "", type_text).strip()  # greedy: strips nested args
    dims = text.count("[]") + (1 if text.endswith("...") else 0)
    text = text.replace("[]", "").replace("...", "").strip()
    if " " in text:  # annotations or '? extends'
        text = text.split()[-1]
    return text, dims


class Resolver:
    def __init__(self, model: CodeModel):
        self.model = model
        self.classes = model.classes
        self.by_class: dict[str, list[CallableDecl]] = {}
        for decl in model.callables.values():
            self.by_class.setdefault(decl.declaring_class, []).append(decl)
        for decls in self.by_class.values():
            decls.sort(key=lambda d: d.id)
        self._type_cache: dict[tuple[str, str, bool], Optional[str]] = {}

    # -- classes -------------------------------------------------------------

    def resolve_class(self, name: str, ctx: ClassRecord, inherited: bool = True) -> Optional[str]:
        key = (name, ctx.qualified_name, inherited)
        if key not in self._type_cache:
            self._type_cache[key] = self._resolve_class(name, ctx, inherited)
        return self._type_cache[key]

    def _resolve_class(self, name: str, ctx: ClassRecord, inherited: bool) -> Optional[str]:
        # Supertype names are resolved without inherited member types, which
        # keeps resolution well-founded.
        if not name:
            return None
        if "." in name:
            head, rest = name.split(".", 1)
            outer = self._resolve_class(head, ctx, inherited)
            if outer is not None:
                cand = f"{outer}.{rest}"
                return cand if cand in self.classes else None
            return name if name in self.classes else None
        # member types of the class, its enclosing classes and their supertypes
        scope: Optional[ClassRecord] = ctx
        while scope is not None:
            owners = self._hierarchy(scope) if inherited else [scope.qualified_name]
            for owner in owners:
                cand = f"{owner}.{name}"
                if cand in self.classes:
                    return cand
            if scope.simple_name == name:
                return scope.qualified_name
            scope = self.classes.get(scope.enclosing) if scope.enclosing else None
        for imp in ctx.imports:
            if imp.startswith("static ") or imp.endswith(".*"):
                continue
            if imp.rsplit(".", 1)[-1] == name and imp in self.classes:
                return imp
        cand = f"{ctx.package}.{name}" if ctx.package else name
        if cand in self.classes:
            return cand
        for imp in ctx.imports:
            if imp.endswith(".*") and not imp.startswith("static "):
                cand = f"{imp[:-2]}.{name}"
                if cand in self.classes:
                    return cand
        return None

    def type_ref(self, type_text: str, ctx: ClassRecord) -> TypeRef:
        raw, dims = base_type(type_text)
        return TypeRef(self.resolve_class(raw, ctx), raw, dims)

    def supertypes(self, rec: ClassRecord) -> list[str]:
        out = []
        for t in rec.extends + rec.implements:
            qn = self.resolve_class(base_type(t)[0], rec, inherited=False)
            if qn is not None:
                out.append(qn)
        return out

    def _hierarchy(self, rec: ClassRecord) -> list[str]:
        """The class followed by its in-project supertypes, breadth first."""
        seen = [rec.qualified_name]
        queue = [rec]
        while queue:
            cur = queue.pop(0)
            for sup in self.supertypes(cur):
                if sup not in seen:
                    seen.append(sup)
                    queue.append(self.classes[sup])
        return seen

    # -- members -------------------------------------------------------------

    def find_field(self, class_qn: str, name: str) -> Optional[tuple[str, FieldDecl]]:
        rec = self.classes.get(class_qn)
        if rec is None:
            return None
        for owner in self._hierarchy(rec):
            f = self.classes[owner].field(name)
            if f is not None:
                return owner, f
        return None

    def find_field_lexical(self, ctx: ClassRecord, name: str) -> Optional[tuple[str, FieldDecl]]:
        scope: Optional[ClassRecord] = ctx
        while scope is not None:
            hit = self.find_field(scope.qualified_name, name)
            if hit is not None:
                return hit
            scope = self.classes.get(scope.enclosing) if scope.enclosing else None
        return None

    def methods_named(self, class_qn: str, name: str) -> list[CallableDecl]:
        rec = self.classes.get(class_qn)
        if rec is None:
            return []
        out: list[CallableDecl] = []
        for owner in self._hierarchy(rec):
            out.extend(d for d in self.by_class.get(owner, ()) if d.kind == "method" and d.name == name)
            if out:
                return out
        return out

    def constructors(self, class_qn: str) -> list[CallableDecl]:
        return [d for d in self.by_class.get(class_qn, ()) if d.kind == "constructor"]

    def pick_overload(self, candidates: list[CallableDecl], arg_types: list[Optional[TypeRef]]) -> Optional[CallableDecl]:
        n = len(arg_types)
        fitting = []
        for decl in candidates:
            params = decl.parameters
            varargs = bool(params) and params[-1][1].endswith("...")
            if len(params) == n or (varargs and n >= len(params) - 1):
                fitting.append(decl)
        if not fitting:
            return None
        if len(fitting) == 1:
            return fitting[0]
        scored = []
        for decl in fitting:
            score = 0
            for (_, ptype), arg in zip(decl.parameters, arg_types):
                score += _match_score(base_type(ptype), arg)
            scored.append((-score, decl.id, decl))
        scored.sort(key=lambda s: (s[0], s[1]))
        return scored[0][2]


def _match_score(param: tuple[str, int], arg: Optional[TypeRef]) -> int:
    if arg is None:
        return 0
    pname, pdims = param
    aname = arg.qn.rsplit(".", 1)[-1] if arg.qn else arg.raw
    if pdims != arg.dims:
        return -1
    if pname == aname or _BOXES.get(pname) == aname or _BOXES.get(aname) == pname:
        return 2
    if pname in _NUMERIC_RANK and aname in _NUMERIC_RANK:
        return 1 if _NUMERIC_RANK[aname] <= _NUMERIC_RANK[pname] else -1
    if pname == "Object":
        return 1
    if pname in _NUMERIC_RANK or aname in _NUMERIC_RANK or pname == "boolean" or aname == "boolean":
        return -1
    return 0


# ---------------------------------------------------------------------------
# dependency extraction


@dataclass
class _Deps:
    invoked: set[str] = field(default_factory=set)
    unresolved: set[str] = field(default_factory=set)
    fields: set[tuple[str, str]] = field(default_factory=set)
    sites: set[tuple[str, int, int]] = field(default_factory=set)


class MethodAnalyzer:
    """Walks one callable body with lexical scopes, resolving calls and field uses."""

    def __init__(self, resolver: Resolver, decl: CallableDecl):
        self.r = resolver
        self.decl = decl
        self.ctx = resolver.classes[decl.declaring_class]
        self.source = resolver.model.units[decl.source_unit].text
        self.scopes: list[dict[str, str]] = [{name: t for name, t in decl.parameters}]
        self.deps = _Deps()
        self.view: Optional[TokenView] = None

    def run(self) -> _Deps:
        if self.decl.body_span is None:
            return self.deps
        block, tokens = js.parse_block(self.source, self.decl.body_span)
        self.view = TokenView(tokens)
        self.stmt(block)
        return self.deps

    # -- scopes --------------------------------------------------------------

    def local_type(self, name: str) -> Optional[str]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def declare(self, name: str, type_text: str) -> None:
        self.scopes[-1][name] = type_text

    # -- statements ----------------------------------------------------------

    def stmt(self, s: js.Stmt) -> None:
        if isinstance(s, js.Block):
            self.scopes.append({})
            for inner in s.stmts:
                self.stmt(inner)
            self.scopes.pop()
        elif isinstance(s, js.LocalVar):
            for d in s.declarators:
                if d.init is not None:
                    self.expr(d.init)
                type_text = s.type_text
                if type_text == "var" and d.init is not None:
                    type_text = self._var_type(d.init) or type_text
                self.declare(d.name, type_text)
        elif isinstance(s, js.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, js.If):
            self.expr(s.cond)
            self.stmt(s.then)
            if s.orelse is not None:
                self.stmt(s.orelse)
        elif isinstance(s, (js.While,)):
            self.expr(s.cond)
            self.stmt(s.body)
        elif isinstance(s, js.DoWhile):
            self.stmt(s.body)
            self.expr(s.cond)
        elif isinstance(s, js.For):
            self.scopes.append({})
            for init in s.init:
                self.stmt(init)
            if s.cond is not None:
                self.expr(s.cond)
            for upd in s.update:
                self.expr(upd)
            self.stmt(s.body)
            self.scopes.pop()
        elif isinstance(s, js.ForEach):
            self.expr(s.iterable)
            self.scopes.append({s.var_name: s.var_type})
            self.stmt(s.body)
            self.scopes.pop()
        elif isinstance(s, js.Switch):
            self.expr(s.selector)
            self.scopes.append({})
            for case in s.cases:
                for body in case.body:
                    self.stmt(body)
            self.scopes.pop()
        elif isinstance(s, (js.Return, js.Throw)):
            if s.value is not None:
                self.expr(s.value)
        elif isinstance(s, js.Try):
            self.scopes.append({})
            for res in s.resources:
                self.stmt(res)
            self.stmt(s.block)
            self.scopes.pop()
            for c in s.catches:
                self.scopes.append({c.name: c.types[0]})
                self.stmt(c.block)
                self.scopes.pop()
            if s.final is not None:
                self.stmt(s.final)
        elif isinstance(s, js.Synchronized):
            self.expr(s.lock)
            self.stmt(s.block)
        elif isinstance(s, js.Labeled):
            self.stmt(s.body)
        elif isinstance(s, js.Opaque) and s.expr is not None:
            self.expr(s.expr)

    def _var_type(self, init: js.Expr) -> Optional[str]:
        toks = self.view.toks
        if toks[init.lo].text == "new":
            _, type_text = self.view.type_at(init.lo + 1, init.hi)
            return type_text or None
        return None

    # -- expressions ---------------------------------------------------------

    def expr(self, e: js.Expr) -> None:
        facts = analyze(self.view, e.lo, e.hi)
        for name, type_text in facts.declared:
            self.declare(name, type_text)
        for call in facts.calls:
            self.call(call)
        for sel in facts.selects:
            owner = self.chain_type(sel.receiver)
            if owner is None or owner.qn is None or owner.dims:
                continue
            hit = self.r.find_field(owner.qn, sel.name)
            if hit is not None:
                self.deps.fields.add((hit[0], sel.name))
        for name, _ in facts.names:
            self._bare_name(name)
        for name, _ in facts.assigned:
            self._bare_name(name)
        # capitalized receiver heads (LOG.info) are left out of facts.names
        for receiver in [c.receiver for c in facts.calls] + [s.receiver for s in facts.selects]:
            if receiver and receiver[0].kind == "name":
                self._bare_name(receiver[0].text)

    def _bare_name(self, name: str) -> None:
        if self.local_type(name) is not None:
            return
        hit = self.r.find_field_lexical(self.ctx, name)
        if hit is not None:
            self.deps.fields.add((hit[0], name))

    def arg_types(self, call: CallSite) -> list[Optional[TypeRef]]:
        out: list[Optional[TypeRef]] = []
        toks = self.view.toks
        for (a, b), lit in zip(call.args, call.arg_literals):
            if lit is not None:
                out.append(TypeRef(None, lit))
                continue
            if b - a >= 1 and (toks[a].kind == "ident" or toks[a].text in ("this", "new", "(")):
                first = a
                last = b - 1
                if self.view.chain_start(last, a) == first:
                    out.append(self.chain_type(self.view.segments(first, last)))
                    continue
            out.append(None)
        return out

    def call(self, call: CallSite) -> None:
        target = self.resolve_call(call)
        if target is not None:
            self.deps.invoked.add(target.id)
            self.deps.sites.add((target.id, call.start, call.end))
        else:
            self.deps.unresolved.add(self.raw_call(call))

    def resolve_call(self, call: CallSite) -> Optional[CallableDecl]:
        args = self.arg_types(call)
        if call.kind == "new":
            qn = self.r.resolve_class(base_type(call.name)[0], self.ctx)
            return self.r.pick_overload(self.r.constructors(qn), args) if qn else None
        if call.kind == "this":
            return self.r.pick_overload(self.r.constructors(self.ctx.qualified_name), args)
        if call.kind == "super":
            sups = [s for s in self.r.supertypes(self.ctx) if self.r.classes[s].kind == "class"]
            return self.r.pick_overload(self.r.constructors(sups[0]), args) if sups else None
        if call.receiver is None:
            scope: Optional[ClassRecord] = self.ctx
            while scope is not None:
                cands = self.r.methods_named(scope.qualified_name, call.name)
                if cands:
                    return self.r.pick_overload(cands, args)
                scope = self.r.classes.get(scope.enclosing) if scope.enclosing else None
            for imp in self.ctx.imports:
                if imp.startswith("static ") and imp.endswith("." + call.name):
                    owner = imp[len("static ") :].rsplit(".", 1)[0]
                    return self.r.pick_overload(self.r.methods_named(owner, call.name), args)
            return None
        owner = self.chain_type(call.receiver)
        if owner is None or owner.qn is None or owner.dims:
            return None
        return self.r.pick_overload(self.r.methods_named(owner.qn, call.name), args)

    def raw_call(self, call: CallSite) -> str:
        if call.kind == "new":
            return f"new {call.name}"
        if call.kind in ("this", "super"):
            return f"{call.kind}()"
        if call.receiver is None:
            return call.name
        return f"{render_segments(call.receiver)}.{call.name}"

    def chain_type(self, segs: list[Segment]) -> Optional[TypeRef]:
        cur: Optional[TypeRef] = None
        pending_pkg: Optional[str] = None
        for i, seg in enumerate(segs):
            if i == 0:
                cur = self._primary(seg)
                if cur is None and seg.kind == "name":
                    pending_pkg = seg.text
                    continue
            elif pending_pkg is not None:
                if seg.kind != "field":
                    return None
                pending_pkg = f"{pending_pkg}.{seg.text}"
                if pending_pkg in self.r.classes:
                    cur = TypeRef(pending_pkg, pending_pkg.rsplit(".", 1)[-1], 0, True)
                    pending_pkg = None
                continue
            else:
                cur = self._select(cur, seg)
            if cur is None:
                return None
        return None if pending_pkg is not None else cur

    def _primary(self, seg: Segment) -> Optional[TypeRef]:
        if seg.kind == "name":
            local = self.local_type(seg.text)
            if local is not None:
                return self.r.type_ref(local, self.ctx)
            hit = self.r.find_field_lexical(self.ctx, seg.text)
            if hit is not None:
                owner, f = hit
                return self.r.type_ref(f.declared_type, self.r.classes[owner])
            qn = self.r.resolve_class(seg.text, self.ctx)
            if qn is not None:
                return TypeRef(qn, seg.text, 0, True)
            return None
        if seg.kind == "this":
            return TypeRef(self.ctx.qualified_name, self.ctx.simple_name)
        if seg.kind == "super":
            sups = self.r.supertypes(self.ctx)
            return TypeRef(sups[0], sups[0].rsplit(".", 1)[-1]) if sups else None
        if seg.kind in ("new", "cast"):
            return self.r.type_ref(seg.text, self.ctx)
        if seg.kind == "literal" and seg.text.startswith('"'):
            return TypeRef(None, "String")
        if seg.kind == "paren" and seg.inner:
            return self.chain_type(seg.inner)
        if seg.kind == "call":
            scope: Optional[ClassRecord] = self.ctx
            while scope is not None:
                cands = self.r.methods_named(scope.qualified_name, seg.text)
                if cands:
                    return self._returns(self.r.pick_overload(cands, [None] * seg.nargs))
                scope = self.r.classes.get(scope.enclosing) if scope.enclosing else None
        return None

    def _select(self, cur: Optional[TypeRef], seg: Segment) -> Optional[TypeRef]:
        if cur is None:
            return None
        if seg.kind == "index":
            return TypeRef(cur.qn, cur.raw, cur.dims - 1) if cur.dims > 0 else None
        if cur.dims:
            if seg.kind == "field" and seg.text == "length":
                return TypeRef(None, "int")
            return None
        if cur.qn is None:
            return None
        if seg.kind == "field":
            hit = self.r.find_field(cur.qn, seg.text)
            if hit is not None:
                owner, f = hit
                return self.r.type_ref(f.declared_type, self.r.classes[owner])
            if cur.static_ref and f"{cur.qn}.{seg.text}" in self.r.classes:
                return TypeRef(f"{cur.qn}.{seg.text}", seg.text, 0, True)
            return None
        if seg.kind == "call":
            return self._returns(self.r.pick_overload(self.r.methods_named(cur.qn, seg.text), [None] * seg.nargs))
        return None

    def _returns(self, decl: Optional[CallableDecl]) -> Optional[TypeRef]:
        if decl is None or decl.return_type == "void":
            return None
        return self.r.type_ref(decl.return_type, self.r.classes[decl.declaring_class])


def render_segments(segs: list[Segment]) -> str:
    parts: list[str] = []
    for i, seg in enumerate(segs):
        if seg.kind == "index":
            parts.append("[]")
            continue
        if seg.kind == "call":
            piece = f"{seg.text}()"
        elif seg.kind == "new":
            piece = f"new {seg.text}()"
        elif seg.kind == "cast":
            piece = f"(({seg.text}) ...)"
        elif seg.kind == "paren":
            piece = f"({render_segments(seg.inner)})" if seg.inner else "(...)"
        else:
            piece = seg.text
        parts.append(piece if i == 0 else "." + piece)
    return "".join(parts)


# ---------------------------------------------------------------------------
# building, updating, persisting


def _unit_for(resolver: Resolver, decl: CallableDecl) -> KnowledgeUnit:
    deps = MethodAnalyzer(resolver, decl).run()
    return make_unit(
        callable_id=decl.id,
        kind=decl.kind,
        signature_text=decl.signature,
        doc_comment=decl.doc_comment,
        invoked_methods=tuple(sorted(deps.invoked)),
        unresolved_calls=tuple(sorted(deps.unresolved)),
        accessed_fields=tuple(sorted(deps.fields)),
        containing_class=decl.declaring_class,
        visibility=decl.visibility,
        is_static=decl.is_static,
        source_unit=decl.source_unit,
        call_sites=tuple(sorted(deps.sites, key=lambda s: (s[1], s[2], s[0]))),
    )


def api_digest(model: CodeModel) -> str:
    """Digest of everything name resolution reads: declarations, never bodies."""
    payload = {
        "classes": {
            qn: [rec.kind, rec.package, list(rec.extends), list(rec.implements), list(rec.imports), rec.enclosing,
                 [[f.name, f.declared_type, f.is_static] for f in rec.fields]]
            for qn, rec in sorted(model.classes.items())
        },
        "callables": {
            cid: [d.kind, d.name, d.return_type, [list(p) for p in d.parameters], d.declaring_class]
            for cid, d in sorted(model.callables.items())
        },
    }
    return _digest(payload)


def _simple_names(classes: dict[str, ClassRecord]) -> dict[str, frozenset[str]]:
    out: dict[str, set[str]] = {}
    for qn, rec in classes.items():
        out.setdefault(rec.simple_name, set()).add(qn)
    return {name: frozenset(qns) for name, qns in sorted(out.items())}


def build_index(model: CodeModel) -> FunctionIndex:
    if not model.callables and not model.classes:
        raise ValueError("cannot index an empty code model")
    resolver = Resolver(model)
    units = {cid: _unit_for(resolver, model.callables[cid]) for cid in sorted(model.callables)}
    return FunctionIndex(
        units=units,
        classes=dict(sorted(model.classes.items())),
        simple_name_index=_simple_names(model.classes),
        file_digests={p: u.content_digest for p, u in sorted(model.units.items())},
        api_digest=api_digest(model),
        model=model,
    )


def update_index(index: FunctionIndex, changed: Iterable[str], model: CodeModel) -> FunctionIndex:
    """Rebuild ``index`` for ``model``, recomputing only units of changed files.

    Units are reused when their file's digest is unchanged and the
    project-wide declaration surface is unchanged; a surface change can alter
    name resolution anywhere, so every unit is recomputed in that case.
    """
    new_digests = {p: u.content_digest for p, u in sorted(model.units.items())}
    dirty = set(changed)
    dirty |= {p for p, d in new_digests.items() if index.file_digests.get(p) != d}
    surface = api_digest(model)
    if surface != index.api_digest:
        dirty |= set(new_digests)
    resolver = Resolver(model)
    units: dict[str, KnowledgeUnit] = {}
    for cid in sorted(model.callables):
        decl = model.callables[cid]
        old = index.units.get(cid)
        if decl.source_unit not in dirty and old is not None:
            units[cid] = old
        else:
            units[cid] = _unit_for(resolver, decl)
    return FunctionIndex(
        units=units,
        classes=dict(sorted(model.classes.items())),
        simple_name_index=_simple_names(model.classes),
        file_digests=new_digests,
        api_digest=surface,
        model=model,
    )


def _class_payload(rec: ClassRecord) -> dict:
    data = asdict(rec)
    data["fields"] = [asdict(f) for f in rec.fields]
    return data


def dumps_index(index: FunctionIndex) -> str:
    lines = [
        json.dumps(
            {"record": "header", "format_version": FORMAT_VERSION, "api_digest": index.api_digest, "files": index.file_digests},
            sort_keys=True, ensure_ascii=False,
        )
    ]
    for qn in sorted(index.classes):
        lines.append(json.dumps({"record": "class", **_class_payload(index.classes[qn])}, sort_keys=True, ensure_ascii=False))
    for cid in sorted(index.units):
        unit = index.units[cid]
        lines.append(json.dumps({"record": "unit", **unit.payload(), "content_digest": unit.content_digest}, sort_keys=True, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def save_index(index: FunctionIndex, path: str | Path) -> None:
    Path(path).write_text(dumps_index(index), encoding="utf-8")


def loads_index(text: str) -> FunctionIndex:
    header = None
    classes: dict[str, ClassRecord] = {}
    units: dict[str, KnowledgeUnit] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec.pop("record")
        if kind == "header":
            if rec.get("format_version") != FORMAT_VERSION:
                raise ValueError(f"unsupported index format_version {rec.get('format_version')!r}")
            header = rec
        elif kind == "class":
            rec["fields"] = tuple(FieldDecl(**f) for f in rec["fields"])
            for key in ("constructors", "methods", "extends", "implements", "imports"):
                rec[key] = tuple(rec[key])
            classes[rec["qualified_name"]] = ClassRecord(**rec)
        elif kind == "unit":
            rec["invoked_methods"] = tuple(rec["invoked_methods"])
            rec["unresolved_calls"] = tuple(rec["unresolved_calls"])
            rec["accessed_fields"] = tuple(tuple(f) for f in rec["accessed_fields"])
            rec["call_sites"] = tuple(tuple(c) for c in rec["call_sites"])
            units[rec["callable_id"]] = KnowledgeUnit(**rec)
    if header is None:
        raise ValueError("index file has no header record")
    return FunctionIndex(units, classes, _simple_names(classes), dict(header["files"]), header["api_digest"])


def load_index(path: str | Path) -> FunctionIndex:
    return loads_index(Path(path).read_text(encoding="utf-8"))


def class_declaration(rec: ClassRecord) -> str:
    return collapse_ws(rec.declaration)
