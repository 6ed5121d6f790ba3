import json

import pytest

from ktforge.cli import build_parser, main
from ktforge.config import Config, ConfigError, describe_keys, load_config
from ktforge.knowledge import load_index

from conftest import TOY

FRAMEWORK = "package p;\n\nimport org.junit.jupiter.api.Test;\n\nclass KTest {\n    @Test\n    void a() {}\n}\n"


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)  # keep a stray ./ktforge.toml from being picked up


def test_defaults():
    cfg = load_config(None)
    assert cfg == Config()
    assert (cfg.related_top_n, cfg.max_usage_traces, cfg.repair_cap) == (5, 3, 5)
    assert cfg.views == ["branch", "functional", "exception"]


@pytest.mark.parametrize("text", [
    "bogus = 1\n",
    "[gateway]\nmodle = \"x\"\n",
    "repair_cap = \"five\"\n",
    "views = [\"branch\", \"perf\"]\n",
    "[gateway]\nbackend = \"mock\"\n",
    "project = 3\n",
    "not toml at all [\n",
])
def test_bad_config_rejected(tmp_path, text):
    path = tmp_path / "bad.toml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path)


def test_unknown_key_is_named(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[build]\ntimeout = 3\n")
    with pytest.raises(ConfigError, match="'timeout'"):
        load_config(path)


def test_relative_paths_resolve_against_config(tmp_path):
    (tmp_path / "sub").mkdir()
    path = tmp_path / "sub" / "k.toml"
    path.write_text("index_path = \"kb.jsonl\"\n[gateway]\ntemperature = 0\n")
    cfg = load_config(path)
    assert cfg.path(cfg.index_path) == tmp_path / "sub" / "kb.jsonl"
    assert cfg.gateway.temperature == 0.0


def test_help_lists_every_key(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for key, default in describe_keys():
        assert f"{key} = {json.dumps(default)}" in out
    assert "gateway.backend" in out and "build.compile_command" in out


def test_index_command(tmp_path, capsys):
    out = tmp_path / "kb.jsonl"
    assert main(["index", str(TOY), "-o", str(out)]) == 0
    assert "callables" in capsys.readouterr().out
    assert len(load_index(out).units) > 0


def test_missing_config_exit_2(tmp_path, capsys):
    assert main(["-c", str(tmp_path / "none.toml"), "index", str(TOY)]) == 2
    assert capsys.readouterr().err.startswith("error[KT001]:")


def test_missing_root_exit_2(tmp_path, capsys):
    assert main(["index", str(tmp_path / "nowhere"), "-o", str(tmp_path / "kb.jsonl")]) == 2
    assert "error[KT002]:" in capsys.readouterr().err


def test_related_output(capsys):
    assert main(["related", "toy.bank.Account#withdraw(double)", "--root", str(TOY), "-n", "2"]) == 0
    assert capsys.readouterr().out.splitlines() == ["1.0000  toy.bank.Account#deposit(double)",
                                                    "0.5000  toy.bank.Account#getBalance()"]


def test_related_unknown_focal(capsys):
    assert main(["related", "toy.Nope#x()", "--root", str(TOY)]) == 2
    assert "error[KT003]:" in capsys.readouterr().err


def test_trace_dot(tmp_path):
    out = tmp_path / "t.dot"
    focal = "toy.match.PatternMatcher#findMatchPattern(InputCharactor[],ValuePatterns)"
    assert main(["trace", focal, "--root", str(TOY), "-o", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("digraph chains {")
    assert text.count("digraph") == 2
    assert "style=filled" in text and "instanceof ValuePatterns" in text


def test_integrate_command(tmp_path, capsys):
    fw = tmp_path / "KTest.java"
    fw.write_text(FRAMEWORK)
    m1 = tmp_path / "m1.java"
    m1.write_text("@Test\nvoid b() {\n    x();\n}\n")
    broken = tmp_path / "m2.java"
    broken.write_text("@Test void c() {")
    assert main(["integrate", "--framework", str(fw), "--methods", str(m1), str(broken)]) == 0
    out = capsys.readouterr().out
    assert "void a() {\n    }" in out and "void b() {\n        x();\n    }" in out and "void c()" not in out


def test_integrate_bad_framework(tmp_path, capsys):
    fw = tmp_path / "Bad.java"
    fw.write_text("class {")
    m = tmp_path / "m.java"
    m.write_text("void f() {}")
    assert main(["integrate", "--framework", str(fw), "--methods", str(m)]) == 2
    assert "error[KT004]:" in capsys.readouterr().err


def test_eval_command(tmp_path, capsys):
    res = tmp_path / "results" / "a"
    res.mkdir(parents=True)
    (res / "result.json").write_text(json.dumps({
        "focal_id": "a.A#f()", "compiled": True, "executed_clean": True, "line_counters": [3, 1],
        "branch_counters": [1, 1], "wall_time_s": 2.0, "test_case_count": 4}))
    report = tmp_path / "report.csv"
    assert main(["eval", "--results", str(tmp_path / "results"), "-o", str(report)]) == 0
    assert report.read_text() == "CPR,EPR,LC,BC,LCP,BCP,AvT,AvTC\n100.00,100.00,75.00,50.00,75.00,50.00,2.00,4.00\n"
    assert capsys.readouterr().out == report.read_text()
    (tmp_path / "empty").mkdir()
    assert main(["eval", "--results", str(tmp_path / "empty"), "-o", str(report)]) == 2


def test_generate_requires_focals_and_build(tmp_path, capsys):
    cfg = tmp_path / "k.toml"
    cfg.write_text(f"[project]\nroot = \"{TOY}\"\ninclude = [\"src/main/java/**/*.java\"]\n")
    assert main(["-c", str(cfg), "generate", "--backend", "replay"]) == 2
    assert main(["-c", str(cfg), "generate", "toy.bank.Account#withdraw(double)", "--backend", "replay"]) == 2
    err = capsys.readouterr().err
    assert "error[KT001]:" in err and "error[KT006]:" in err


def test_generate_missing_fixture_exits_1(tmp_path, capsys):
    cfg = tmp_path / "k.toml"
    cfg.write_text(f"[project]\nroot = \"{TOY}\"\ninclude = [\"src/main/java/**/*.java\"]\n"
                   f"[gateway]\nbackend = \"replay\"\nfixture_dir = \"{tmp_path / 'nofixtures'}\"\n"
                   "[build]\ncompile_command = \"true\"\ntest_command = \"true\"\n")
    code = main(["-c", str(cfg), "generate", "toy.bank.Account#deposit(double)", "-o", str(tmp_path / "out")])
    assert code == 1
    assert "error[KT010]:" in capsys.readouterr().err
    summary = json.loads((tmp_path / "out" / "toy.bank.Account_deposit_double" / "artifact.json").read_text())
    assert summary["status"] == "abandoned"


def test_structured_logs(tmp_path, capsys):
    bad = tmp_path / "p"
    (bad / "src/main/java").mkdir(parents=True)
    (bad / "src/main/java/A.java").write_text("class A { void f() {} }\n")
    (bad / "src/main/java/B.java").write_text("class B { void f() { \n")
    assert main(["--log-format", "structured", "index", str(bad), "-o", str(tmp_path / "kb.jsonl")]) == 0
    records = [json.loads(l) for l in capsys.readouterr().err.splitlines()]
    assert records and records[0]["level"] == "warning" and "B.java" in records[0]["message"]


def test_parser_subcommands():
    sub = next(a for a in build_parser()._actions if a.dest == "command")
    assert set(sub.choices) == {"index", "generate", "related", "trace", "integrate", "eval"}
