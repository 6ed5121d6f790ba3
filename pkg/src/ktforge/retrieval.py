"""Usage-based similarity between functions and assembly of the usage context."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .knowledge import FunctionIndex, KnowledgeUnit
from .usage.slicing import UsageTrace


class UnknownFocal(KeyError):
    def __str__(self) -> str:
        return f"unknown focal method {self.args[0]!r}"


@dataclass(frozen=True)
class UsageProfile:
    callable_id: str
    M: frozenset[str]
    F: frozenset[tuple[str, str]]

    @classmethod
    def of(cls, unit: KnowledgeUnit) -> "UsageProfile":
        return cls(unit.callable_id, frozenset(unit.invoked_methods), frozenset(unit.accessed_fields))


def jaccard(x: frozenset, y: frozenset) -> Fraction:
    union = len(x | y)
    return Fraction(len(x & y), union) if union else Fraction(0)


def similarity(a: UsageProfile, b: UsageProfile) -> Fraction:
    """Method-usage plus field-usage Jaccard, each term in [0, 1]."""
    return jaccard(a.M, b.M) + jaccard(a.F, b.F)


def related_functions(focal_id: str, index: FunctionIndex, n: int = 5) -> list[tuple[str, Fraction]]:
    if focal_id not in index.units:
        raise UnknownFocal(focal_id)
    if n <= 0:
        return []
    focal = UsageProfile.of(index.units[focal_id])
    scored = []
    for cid, unit in index.units.items():
        if cid == focal_id:
            continue
        score = similarity(focal, UsageProfile.of(unit))
        if score > 0:
            scored.append((-score, cid))
    scored.sort()
    return [(cid, -neg) for neg, cid in scored[:n]]


def shared_marker(a: UsageProfile, b: UsageProfile) -> str:
    methods = sorted(a.M & b.M)
    fields = sorted(a.F & b.F)
    parts = []
    if methods:
        parts.append("methods " + ", ".join(short_method(m) for m in methods))
    if fields:
        parts.append("fields " + ", ".join(f"{cls.rsplit('.', 1)[-1]}.{name}" for cls, name in fields))
    return "shares " + "; ".join(parts)


def short_method(callable_id: str) -> str:
    cls, rest = callable_id.split("#", 1)
    return f"{cls.rsplit('.', 1)[-1]}.{rest}"


@dataclass(frozen=True)
class UsageContext:
    focal_id: str
    class_declaration_text: str
    relevant_field_decls: tuple[str, ...]
    dependent_method_signatures: tuple[tuple[str, Optional[str]], ...]
    related_method_signatures: tuple[tuple[str, str], ...]
    usage_traces: tuple[str, ...]

    def render(self) -> str:
        out = ["### Class declaration", self.class_declaration_text]
        if self.relevant_field_decls:
            out += ["", "### Relevant fields", *self.relevant_field_decls]
        if self.dependent_method_signatures:
            out += ["", "### Methods invoked by the focal method"]
            for sig, doc in self.dependent_method_signatures:
                out.append(_with_doc(sig, doc))
        if self.related_method_signatures:
            out += ["", "### Related methods"]
            out += [f"{sig}  // {marker}" for sig, marker in self.related_method_signatures]
        if self.usage_traces:
            out += ["", "### Usage examples"]
            for trace in self.usage_traces:
                out += [trace, ""]
            out.pop()
        return "\n".join(out)


def _with_doc(text: str, doc: Optional[str]) -> str:
    if not doc:
        return text
    body = "\n".join(f" * {line}".rstrip() for line in doc.splitlines())
    return f"/**\n{body}\n */\n{text}"


def _qualify(sig: str, cls: str, home: str) -> str:
    return sig if cls == home else f"{sig}  // in {cls}"


def assemble_usage_context(focal_id: str, index: FunctionIndex, traces: Iterable[UsageTrace] = (), n: int = 5) -> UsageContext:
    if focal_id not in index.units:
        raise UnknownFocal(focal_id)
    unit = index.units[focal_id]
    home = unit.containing_class
    rec = index.classes[home]
    related = related_functions(focal_id, index, n)
    focal_profile = UsageProfile.of(unit)

    field_keys: set[tuple[str, str]] = set(unit.accessed_fields)
    for dep in unit.invoked_methods:
        field_keys |= set(index.units[dep].accessed_fields)
    for cid, _ in related:
        field_keys |= set(index.units[cid].accessed_fields)
    fields = []
    for cls, name in sorted(field_keys, key=lambda k: (k[0] != home, k)):
        owner = index.classes.get(cls)
        decl = owner.field(name) if owner else None
        if decl is None:
            continue
        text = _with_doc(decl.text, decl.doc_comment)
        fields.append(_qualify(text, cls, home))
    fields = list(dict.fromkeys(fields))

    dependents = []
    for dep in unit.invoked_methods:
        d = index.units[dep]
        dependents.append((_qualify(d.signature_text, d.containing_class, home), d.doc_comment))

    related_sigs = []
    for cid, _ in related:
        other = index.units[cid]
        marker = shared_marker(focal_profile, UsageProfile.of(other))
        related_sigs.append((_qualify(other.signature_text, other.containing_class, home), marker))

    return UsageContext(
        focal_id=focal_id,
        class_declaration_text=_with_doc(rec.declaration, rec.doc_comment),
        relevant_field_decls=tuple(fields),
        dependent_method_signatures=tuple(dependents),
        related_method_signatures=tuple(related_sigs),
        usage_traces=tuple(t.render() for t in traces),
    )
