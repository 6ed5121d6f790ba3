"""The generation stages: framework, multi-view design and method transformation."""
from __future__ import annotations

import json
import re
import string
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from ..frontend.lexer import LexError
from ..frontend import syntax as js
from ..gateway import ChatRequest, Gateway, GatewayError
from ..integrator import FrameworkSyntaxError, Member, parse_members, parse_test_class
from ..knowledge import FunctionIndex, base_type

VIEWS = {
    "branch": "view_branch.txt",
    "functional": "view_functional.txt",
    "exception": "view_exception.txt",
}
KNOWLEDGE_MARKERS = (
    "## Relevant Project Knowledge",
    "### Documentation",
    "### Constructors and Parameters",
    "### Usage Knowledge",
    "### Existing Test Setup",
    "## Usage Context",
    "## Test Class Framework",
)
_FENCE = re.compile(r"```[ \t]*([\w+-]*)[ \t]*\n(.*?)```", re.DOTALL)


class FrameworkParseError(ValueError):
    pass


class Templates:
    """Prompt text assets; files in ``override_dir`` shadow the bundled ones."""

    def __init__(self, override_dir: Optional[str | Path] = None):
        self.override = Path(override_dir) if override_dir else None
        self._cache: dict[str, str] = {}

    def text(self, name: str) -> str:
        if name not in self._cache:
            if self.override is not None and (self.override / name).is_file():
                self._cache[name] = (self.override / name).read_text(encoding="utf-8")
            else:
                self._cache[name] = resources.files("ktforge.pipeline").joinpath("templates", name).read_text(encoding="utf-8")
        return self._cache[name]

    def fill(self, name: str, **values: str) -> str:
        return string.Template(self.text(name)).substitute(values).rstrip("\n")


def extract_code_block(text: str) -> Optional[str]:
    """Body of the first fenced block, or None."""
    m = _FENCE.search(text)
    return m.group(2) if m else None


# ---------------------------------------------------------------------------
# framework


@dataclass
class TestClassFramework:
    source_text: str
    imports: tuple[str, ...]
    fields: tuple[str, ...]
    lifecycle: tuple[str, ...]  # kinds, in declaration order
    helpers: tuple[str, ...]
    test_class: str
    package: Optional[str]


def test_class_name(focal_id: str) -> str:
    cls, rest = focal_id.split("#", 1)
    simple = cls.rsplit(".", 1)[-1].replace("$", "")
    method = rest.split("(", 1)[0]
    method = "Constructor" if method == "<init>" else method[:1].upper() + method[1:]
    return f"{simple}{method}Test"


def existing_test_setup(root: Path, includes: Sequence[str], simple_class: str) -> list[str]:
    """Setup-only excerpts of existing tests that mention the focal class."""
    out = []
    files = sorted({p for pat in includes for p in root.glob(pat) if p.is_file()})
    for path in files:
        text = path.read_text(encoding="utf-8")
        if not re.search(rf"\b{re.escape(simple_class)}\b", text):
            continue
        try:
            parsed = parse_test_class(text)
        except FrameworkSyntaxError:
            continue
        parsed.members = [m for m in parsed.members if m.category in ("field", "lifecycle")]
        if not parsed.members:
            continue
        parsed.package = None
        parsed.imports = []
        out.append(f"// from {path.relative_to(root).as_posix()}\n" + parsed.render().rstrip("\n"))
    return out


def knowledge_section(focal_id: str, index: FunctionIndex, usage_traces: Sequence[str], setup_excerpts: Sequence[str]) -> str:
    unit = index.units[focal_id]
    rec = index.classes[unit.containing_class]
    parts = ["### Documentation"]
    parts.append(f"Class {rec.simple_name}: {_one_para(rec.doc_comment)}")
    parts.append(f"Method {unit.signature_text}: {_one_para(unit.doc_comment)}")

    parts += ["", "### Constructors and Parameters"]
    classes = [rec.qualified_name]
    decl = index.model.callables[focal_id] if index.model else None
    if decl is not None:
        from ..knowledge import Resolver

        resolver = Resolver(index.model)
        for _, ptype in decl.parameters:
            qn = resolver.resolve_class(base_type(ptype)[0], rec)
            if qn and qn not in classes:
                classes.append(qn)
    ctor_lines = []
    for qn in classes:
        crec = index.classes[qn]
        ctors = [index.units[c] for c in crec.constructors if c in index.units]
        if not ctors:
            ctor_lines.append(f"{crec.declaration} (no declared constructors)")
            continue
        for ctor in ctors:
            ctor_lines.append(ctor.signature_text if qn == rec.qualified_name else f"{ctor.signature_text}  // in {qn}")
    parts += ctor_lines

    parts += ["", "### Usage Knowledge"]
    parts += list(usage_traces) if usage_traces else ["No usages of the focal method were found in the project."]
    if setup_excerpts:
        parts += ["", "### Existing Test Setup", "```java", "\n\n".join(setup_excerpts), "```"]
    return "\n".join(parts)


def _one_para(doc: Optional[str]) -> str:
    return " ".join(doc.split()) if doc else "(no documentation)"


def build_framework_prompt(focal_id: str, index: FunctionIndex, templates: Templates, usage_traces: Sequence[str] = (),
                           setup_excerpts: Sequence[str] = ()) -> str:
    unit = index.units[focal_id]
    rec = index.classes[unit.containing_class]
    test_class = test_class_name(focal_id)
    template = string.Template(templates.text("framework_template.java")).substitute(
        package=rec.package, test_class=test_class).rstrip("\n")
    return templates.fill(
        "framework.txt",
        class_name=rec.qualified_name,
        signature=unit.signature_text,
        focal_source=focal_source(focal_id, index),
        knowledge=knowledge_section(focal_id, index, usage_traces, setup_excerpts),
        template=template,
        test_class=test_class,
    )


def focal_source(focal_id: str, index: FunctionIndex) -> str:
    decl = index.model.callables[focal_id]
    text = index.model.source_of(decl)
    lines = text.splitlines()
    # re-indent continuation lines relative to the declaration start
    src = index.model.units[decl.source_unit].text
    col = decl.decl_span[0] - (src.rfind("\n", 0, decl.decl_span[0]) + 1)
    return "\n".join([lines[0]] + [l[min(col, len(l) - len(l.lstrip())):] for l in lines[1:]])


def parse_framework(response: str) -> TestClassFramework:
    code = extract_code_block(response)
    if code is None:
        raise FrameworkParseError("no fenced code block in the response")
    try:
        parsed = parse_test_class(code)
    except FrameworkSyntaxError as exc:
        raise FrameworkParseError(f"framework does not parse: {exc}") from exc
    name = parsed.header.split("{")[0].split()
    class_name = name[name.index("class") + 1] if "class" in name else name[-1]
    return TestClassFramework(
        source_text=parsed.render(),
        imports=tuple(parsed.imports),
        fields=tuple(m.key for m in parsed.by_category("field")),
        lifecycle=tuple(m.key for m in parsed.by_category("lifecycle")),
        helpers=tuple(m.key for m in parsed.by_category("helper")),
        test_class=class_name,
        package=parsed.package,
    )


@dataclass
class Exchange:
    stage: str
    request: dict
    response: Optional[str] = None
    error: Optional[str] = None


def converse(gateway: Gateway, messages: list[tuple[str, str]], stage: str, log: list[Exchange]) -> Optional[str]:
    request: ChatRequest = gateway.request(messages)
    try:
        content = gateway.complete(request).content
    except GatewayError as exc:
        log.append(Exchange(stage, request.to_json(), error=str(exc)))
        return None
    log.append(Exchange(stage, request.to_json(), content))
    return content


def generate_framework(prompt: str, gateway: Gateway, templates: Templates, log: list[Exchange]) -> TestClassFramework:
    """One attempt plus one re-prompt; raises FrameworkParseError when both fail."""
    messages = [("user", prompt)]
    problem = "the request failed"
    for attempt in range(2):
        content = converse(gateway, messages, "framework", log)
        if content is not None:
            try:
                return parse_framework(content)
            except FrameworkParseError as exc:
                problem = str(exc)
            messages = messages + [("assistant", content), ("user", templates.fill("format_reminder.txt", problem=problem))]
    raise FrameworkParseError(problem)


# ---------------------------------------------------------------------------
# test case design


@dataclass(frozen=True)
class TestCaseSpec:
    scenario: str
    inputs: tuple[tuple[str, str], ...]
    expected: str


@dataclass(frozen=True)
class TestCaseGroup:
    group_name: str
    intent: str
    cases: tuple[TestCaseSpec, ...]

    def to_json(self) -> dict:
        return {
            "group_name": self.group_name,
            "intent": self.intent,
            "cases": [
                {"scenario": c.scenario, "inputs": [{"name": n, "value": v} for n, v in c.inputs], "expected": c.expected}
                for c in self.cases
            ],
        }


class IRError(ValueError):
    pass


def _text(value) -> str:
    if isinstance(value, str):
        return value.strip()
    if value is None:
        return ""
    return json.dumps(value, ensure_ascii=False)


def parse_ir(response: str, intent: str) -> tuple[list[TestCaseGroup], list[str]]:
    """Groups from a design response, plus notes about dropped groups.

    The intent of every group is set to the view that produced it.
    """
    code = extract_code_block(response)
    body = code if code is not None else response
    try:
        data = json.loads(body)
    except json.JSONDecodeError as exc:
        raise IRError(f"response is not valid JSON ({exc.msg})") from exc
    if isinstance(data, dict) and isinstance(data.get("groups"), list):
        data = data["groups"]
    if not isinstance(data, list):
        raise IRError("top-level JSON value must be a list of groups")
    groups: list[TestCaseGroup] = []
    notes: list[str] = []
    for i, g in enumerate(data):
        try:
            groups.append(_group(g, intent))
        except IRError as exc:
            notes.append(f"group {i} dropped: {exc}")
    if not groups:
        raise IRError("no valid test case group in the response" + (f" ({notes[0]})" if notes else ""))
    return groups, notes


def _group(g, intent: str) -> TestCaseGroup:
    if not isinstance(g, dict):
        raise IRError("group is not an object")
    name = _text(g.get("group_name"))
    if not name:
        raise IRError("missing group_name")
    cases = g.get("cases")
    if not isinstance(cases, list) or not cases:
        raise IRError("group has no cases")
    specs = []
    for c in cases:
        if not isinstance(c, dict):
            raise IRError("case is not an object")
        scenario, expected = _text(c.get("scenario")), _text(c.get("expected"))
        if not scenario or not expected:
            raise IRError("case needs a scenario and an expected outcome")
        raw_inputs = c.get("inputs") or []
        if not isinstance(raw_inputs, list):
            raise IRError("inputs must be a list")
        inputs = []
        for item in raw_inputs:
            if not isinstance(item, dict) or not _text(item.get("name")):
                raise IRError("each input needs a name")
            inputs.append((_text(item["name"]), _text(item.get("value"))))
        specs.append(TestCaseSpec(scenario, tuple(inputs), expected))
    return TestCaseGroup(name, intent, tuple(specs))


def build_design_prompt(focal_id: str, index: FunctionIndex, view: str, templates: Templates) -> str:
    return templates.fill(
        "design.txt",
        focal_source=focal_source(focal_id, index),
        guidance=templates.text(VIEWS[view]).strip(),
        intent=view,
    )


@dataclass
class DesignResult:
    groups: list[TestCaseGroup] = field(default_factory=list)
    prompts: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def design_test_cases(focal_id: str, index: FunctionIndex, gateway: Gateway, templates: Templates,
                      views: Sequence[str], log: list[Exchange]) -> DesignResult:
    result = DesignResult()
    for view in views:
        prompt = build_design_prompt(focal_id, index, view, templates)
        result.prompts.append(prompt)
        messages = [("user", prompt)]
        for attempt in range(2):
            content = converse(gateway, messages, f"design:{view}", log)
            if content is None:
                result.notes.append(f"{view}: request failed")
                break
            try:
                groups, notes = parse_ir(content, view)
            except IRError as exc:
                if attempt == 0:
                    messages = messages + [("assistant", content), ("user", templates.fill("format_reminder.txt", problem=str(exc)))]
                    continue
                result.notes.append(f"{view}: no usable groups ({exc})")
                break
            result.groups.extend(groups)
            result.notes.extend(f"{view}: {n}" for n in notes)
            break
    return result


# ---------------------------------------------------------------------------
# transformation


@dataclass
class TransformResult:
    method_text: Optional[str]
    note: Optional[str] = None


def select_members(code: str) -> tuple[list[str], list[Member], list[str]]:
    """Keep the first test method plus supporting members; returns (imports, members, notes)."""
    imports, members = parse_members(code)
    tests = [m for m in members if m.category == "test"]
    if not tests:
        raise IRError("no @Test method in the response")
    notes = [f"extra test method {m.key} dropped" for m in tests[1:]]
    kept = [m for m in members if m.category != "test" or m is tests[0]]
    return imports, kept, notes


def render_snippet(imports: Sequence[str], members: Sequence[Member]) -> str:
    lines = [f"import {imp};" for imp in imports]
    if lines:
        lines.append("")
    for i, m in enumerate(members):
        if i:
            lines.append("")
        lines += [l[4:] if l.startswith("    ") else l for l in m.render()]
    return "\n".join(lines) + "\n"


def build_transform_prompt(group: TestCaseGroup, focal_id: str, index: FunctionIndex, usage_context: str,
                           framework: TestClassFramework, templates: Templates) -> str:
    return templates.fill(
        "transform.txt",
        signature=index.units[focal_id].signature_text,
        group=json.dumps(group.to_json(), indent=2, ensure_ascii=False),
        usage_context=usage_context,
        framework=framework.source_text.rstrip("\n"),
    )


def transform_group(group: TestCaseGroup, focal_id: str, index: FunctionIndex, usage_context: str,
                    framework: TestClassFramework, gateway: Gateway, templates: Templates,
                    log: list[Exchange]) -> TransformResult:
    prompt = build_transform_prompt(group, focal_id, index, usage_context, framework, templates)
    messages = [("user", prompt)]
    problem = "the request failed"
    for attempt in range(2):
        content = converse(gateway, messages, f"transform:{group.group_name}", log)
        if content is None:
            return TransformResult(None, f"{group.group_name}: request failed")
        code = extract_code_block(content)
        if code is None:
            problem = "no fenced code block in the response"
        else:
            try:
                imports, members, notes = select_members(code)
                return TransformResult(render_snippet(imports, members), "; ".join(notes) or None)
            except (IRError, js.ParseError, LexError) as exc:
                problem = str(exc)
        if attempt == 0:
            messages = messages + [("assistant", content), ("user", templates.fill("format_reminder.txt", problem=problem))]
    return TransformResult(None, f"{group.group_name}: skipped ({problem})")


def ir_dump(groups: Sequence[TestCaseGroup]) -> str:
    return json.dumps([g.to_json() for g in groups], indent=2, ensure_ascii=False) + "\n"


def exchange_json(e: Exchange) -> dict:
    return {k: v for k, v in asdict(e).items() if v is not None}
