import json
from pathlib import Path

import pytest

from ktforge.config import load_config
from ktforge.gateway import Gateway, MockBackend
from ktforge.pipeline import (ABANDONED, KNOWLEDGE_MARKERS, VIEWS, FrameworkParseError, PipelineContext, Templates,
                              build_framework_prompt, design_test_cases, generate_framework, parse_framework, parse_ir,
                              run_pipeline, transform_group)
from ktforge.pipeline import stages
from ktforge.pipeline.stages import existing_test_setup, ir_dump
from ktforge.refiner import PASSED, BuildResult
from ktforge.usage.slicing import usage_traces

from conftest import GOLDEN

FOCAL = "toy.bank.Account#withdraw(double)"

FIG4 = """```java
package toy.bank;

import org.junit.jupiter.api.AfterEach;
import org.junit.jupiter.api.BeforeEach;
import org.junit.jupiter.api.Test;

class AccountWithdrawTest {
    private Account account;

    @BeforeEach
    void setUp() {
        account = new Account("ann", 50.0);
    }

    @AfterEach
    void tearDown() {
        account = null;
    }

    private void drain() {
        account.withdraw(account.getBalance());
    }

    @Test
    void placeholder() {
    }
}
```"""

IR_EXAMPLE = [
    {"group_name": "null input", "intent": "exception",
     "cases": [{"scenario": "negative amount", "inputs": [{"name": "amount", "value": "-1.0"}],
                "expected": "IllegalArgumentException"}]},
    {"group_name": "invalid state", "intent": "exception",
     "cases": [{"scenario": "frozen account", "inputs": [], "expected": "IllegalStateException"}]},
]


def _ir(name, intent="x"):
    return "```json\n" + json.dumps([{"group_name": name, "intent": intent, "cases": [
        {"scenario": "s", "inputs": [{"name": "amount", "value": "1.0"}], "expected": "true"}]}]) + "\n```"


def _method(name, body="assertTrue(account.withdraw(1.0));"):
    return f"```java\n@Test\nvoid {name}() {{\n    {body}\n}}\n```"


@pytest.fixture(scope="module")
def ctx(toy_root):
    return PipelineContext.load(load_config(toy_root / "ktforge.toml"))


class _Passing:
    def compile(self, test_file: Path) -> BuildResult:
        return BuildResult(0, "")

    def test(self, test_file: Path) -> BuildResult:
        return BuildResult(0, "")


def test_framework_prompt_golden(ctx, toy_root):
    traces = [t.render() for t in usage_traces(FOCAL, ctx.index, ctx.graph)]
    setup = existing_test_setup(toy_root, ctx.config.project.test_include, "Account")
    prompt = build_framework_prompt(FOCAL, ctx.index, ctx.templates, traces, setup)
    assert prompt + "\n" == (GOLDEN / "framework_prompt_withdraw.txt").read_text()
    heads = ["## Core Task and Instructions", "## Focal Method and Class", "## Relevant Project Knowledge",
             "## Test Class Template", "## Output Specification"]
    assert [l for l in prompt.splitlines() if l.startswith("## ")] == heads
    assert "public Account(String owner)" in prompt and "public Account(String owner, double openingBalance)" in prompt


def test_no_existing_tests_omits_setup_section(ctx):
    prompt = build_framework_prompt("toy.match.PatternMatcher#findMatchPattern(Patterns)", ctx.index, ctx.templates)
    assert "### Existing Test Setup" not in prompt
    assert "### Usage Knowledge" in prompt


def test_fig4_framework_members():
    fw = parse_framework(FIG4)
    assert fw.fields == ("account",)
    assert fw.lifecycle == ("before-each", "after-each")
    assert fw.helpers == ("drain",)
    assert fw.test_class == "AccountWithdrawTest" and fw.package == "toy.bank"
    assert "@Test" in fw.source_text


def test_prose_only_framework_reprompts_then_fails():
    mock = MockBackend(["I cannot do that.", "Still no code."])
    with pytest.raises(FrameworkParseError):
        generate_framework("make a framework", Gateway(mock), Templates(), [])
    assert len(mock.requests) == 2
    assert mock.requests[1].messages[-1][0] == "user"


def test_ir_round_trip():
    text = "```json\n" + json.dumps({"groups": IR_EXAMPLE}) + "\n```"
    groups, notes = parse_ir(text, "exception")
    assert notes == []
    assert json.loads(ir_dump(groups)) == IR_EXAMPLE
    assert parse_ir(ir_dump(groups), "exception")[0] == groups


def test_ir_drops_invalid_groups():
    bad = IR_EXAMPLE + [{"group_name": "", "cases": []}, {"group_name": "g", "cases": [{"scenario": "s"}]}]
    groups, notes = parse_ir(json.dumps(bad), "branch")
    assert [g.intent for g in groups] == ["branch", "branch"]
    assert len(notes) == 2


def test_design_views_and_separation(ctx):
    mock = MockBackend([_ir("b1"), "not json", _ir("f1"), "```json\n" + json.dumps(IR_EXAMPLE) + "\n```"])
    result = design_test_cases(FOCAL, ctx.index, Gateway(mock), ctx.templates, list(VIEWS), [])
    assert [(g.group_name, g.intent) for g in result.groups] == [
        ("b1", "branch"), ("f1", "functional"), ("null input", "exception"), ("invalid state", "exception")]
    assert len(mock.requests) == 4  # one re-prompt for the functional view
    for prompt in result.prompts:
        assert not any(marker in prompt for marker in KNOWLEDGE_MARKERS)
        assert "withdraw(double amount)" in prompt


def test_design_view_failing_twice_contributes_nothing(ctx):
    mock = MockBackend(["nope", "still nope"])
    result = design_test_cases(FOCAL, ctx.index, Gateway(mock), ctx.templates, ["branch"], [])
    assert result.groups == [] and result.notes and "branch" in result.notes[0]


def test_transform_exception_group(ctx):
    groups, _ = parse_ir(json.dumps(IR_EXAMPLE), "exception")
    fw = parse_framework(FIG4)
    reply = _method("rejectsNegative", "assertThrows(IllegalArgumentException.class, () -> account.withdraw(-1.0));")
    mock = MockBackend(["no code here", reply])
    result = transform_group(groups[0], FOCAL, ctx.index, "USAGE-CONTEXT", fw, Gateway(mock), ctx.templates, [])
    assert "assertThrows(IllegalArgumentException.class" in result.method_text
    prompt = mock.requests[0].messages[0][1]
    assert "USAGE-CONTEXT" in prompt and "null input" in prompt and "class AccountWithdrawTest" in prompt


def test_transform_keeps_one_test_per_group(ctx):
    groups, _ = parse_ir(json.dumps(IR_EXAMPLE), "exception")
    reply = "```java\n@Test\nvoid a() {\n    x();\n}\n\n@Test\nvoid b() {\n    y();\n}\n```"
    result = transform_group(groups[0], FOCAL, ctx.index, "", parse_framework(FIG4), Gateway(MockBackend([reply])),
                             ctx.templates, [])
    assert "void a()" in result.method_text and "void b()" not in result.method_text
    assert "b dropped" in result.note


def test_full_run_with_mock(ctx, tmp_path):
    script = [FIG4, _ir("b1"), _ir("f1"), _ir("e1"), _method("t1"), _method("t2"), "prose", "more prose"]
    art = run_pipeline(FOCAL, ctx, Gateway(MockBackend(script)), tmp_path, lambda w: _Passing())
    assert art.status == PASSED and art.iterations_used == 0
    assert art.method_groups == ["b1", "f1"]
    assert any("e1: skipped" in n for n in art.notes)
    assert {g.intent for g in art.groups} == set(VIEWS)
    assert art.test_case_count == 3  # placeholder from the framework plus two generated tests
    assert art.test_class == stages.test_class_name(FOCAL) == "AccountWithdrawTest"


def test_abandon_on_framework_failure(ctx, tmp_path):
    art = run_pipeline(FOCAL, ctx, Gateway(MockBackend(["prose", "prose"])), tmp_path, lambda w: _Passing())
    assert (art.status, art.abandoned_reason) == (ABANDONED, "FrameworkParseError")
    assert art.integrated_source is None


def test_abandon_without_test_cases(ctx, tmp_path):
    art = run_pipeline(FOCAL, ctx, Gateway(MockBackend([FIG4] + ["bad"] * 6)), tmp_path, lambda w: _Passing())
    assert (art.status, art.abandoned_reason) == (ABANDONED, "NoTestCases")
    assert len(art.design_prompts) == 3
