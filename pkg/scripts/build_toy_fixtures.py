"""Regenerate the toy replay fixtures and the end-to-end goldens.

No model endpoint or JDK is needed. The model's answers are scripted below
(``AuthorBackend``), and build outcomes come from ``AuthorBuilder``, which
prints javac / Maven / surefire output in the tools' own formats for the
defects the scripted answers contain. Both are recorded: model exchanges into
fixtures/llm/<focal>.json and build runs into fixtures/build/<sha256>.json.
The recorded fixtures are then replayed through the CLI and the resulting
test classes are copied to tests/golden/e2e.

    python3 scripts/build_toy_fixtures.py
"""
from __future__ import annotations

import json
import re
import shutil
import sys
import tempfile
from pathlib import Path

from ktforge.cli import main as cli_main
from ktforge.config import load_config
from ktforge.gateway import ChatRequest, ChatResponse, RecordBackend, ReplayFixture
from ktforge.pipeline import GatewayFactory, PipelineContext, run_focal
from ktforge.refiner import BuildResult, source_digest

REPO = Path(__file__).resolve().parents[1]
TOY = REPO / "src" / "ktforge" / "data" / "toy"
GOLDEN = REPO / "tests" / "golden" / "e2e"

WITHDRAW = "toy.bank.Account#withdraw(double)"
TRANSFER = "toy.bank.Bank#transfer(String,String,double)"
MATCH = "toy.match.PatternMatcher#findMatchPattern(Patterns)"
SIGNATURES = {
    "public boolean withdraw(double amount)": WITHDRAW,
    "public boolean transfer(String from, String to, double amount)": TRANSFER,
    "public int findMatchPattern(Patterns pattern)": MATCH,
}


def fenced(lang: str, body: str, before: str = "", after: str = "") -> str:
    text = f"```{lang}\n{body.strip()}\n```"
    return "\n\n".join(p for p in (before, text, after) if p)


# ---------------------------------------------------------------------------
# scripted model answers

FRAMEWORKS = {
    WITHDRAW: """
package toy.bank;

import static org.junit.jupiter.api.Assertions.assertEquals;

import org.junit.jupiter.api.AfterEach;
import org.junit.jupiter.api.BeforeEach;

class AccountWithdrawTest {
    private static final double EPS = 1e-9;

    private Account account;

    @BeforeEach
    void setUp() {
        account = new Account("alice", 100.0);
    }

    @AfterEach
    void tearDown() {
        account = null;
    }

    private void assertBalance(double expected) {
        assertEquals(expected, account.getBalance(), EPS);
    }
}
""",
    TRANSFER: """
package toy.bank;

import static org.junit.jupiter.api.Assertions.assertEquals;

import org.junit.jupiter.api.AfterEach;
import org.junit.jupiter.api.BeforeEach;

class BankTransferTest {
    private Bank bank;
    private Account alice;
    private Account bob;

    @BeforeEach
    void setUp() {
        bank = new Bank(false);
        alice = bank.openAccount("alice", 100.0);
        bob = bank.openAccount("bob", 20.0);
    }

    @AfterEach
    void tearDown() {
        bank = null;
        alice = null;
        bob = null;
    }

    private void assertBalances(double expectedAlice, double expectedBob) {
        assertEquals(expectedAlice, alice.getBalance(), 1e-9);
        assertEquals(expectedBob, bob.getBalance(), 1e-9);
    }
}
""",
    MATCH: """
package toy.match;

import org.junit.jupiter.api.AfterEach;
import org.junit.jupiter.api.BeforeEach;

class PatternMatcherFindMatchPatternTest {
    private PatternMatcher matcher;

    @BeforeEach
    void setUp() {
        matcher = new PatternMatcher("abcabd");
    }

    @AfterEach
    void tearDown() {
        matcher = null;
    }
}
""",
}

FRAMEWORK_PROSE = (
    "To test transfer I would create a Bank with two funded accounts in a setup method and "
    "clear the references afterwards. The tests can then move money between the two owners."
)


def case(scenario: str, inputs: list[tuple[str, str]], expected: str) -> dict:
    return {"scenario": scenario, "inputs": [{"name": n, "value": v} for n, v in inputs], "expected": expected}


DESIGNS = {
    (WITHDRAW, "branch"): [
        {"group_name": "balance check outcomes", "intent": "branch", "cases": [
            case("amount within the balance takes the success path", [("amount", "40.0")],
                 "returns true and the balance becomes 60.0"),
            case("amount above the balance takes the insufficient funds path", [("amount", "150.0")],
                 "returns false and the balance stays 100.0"),
        ]},
    ],
    (WITHDRAW, "functional"): [
        {"group_name": "exact balance withdrawal", "intent": "functional", "cases": [
            case("withdrawing the whole balance is allowed", [("amount", "100.0")],
                 "returns true and the balance becomes 0.0"),
            case("a tiny amount is withdrawn exactly", [("amount", "0.01")], "balance becomes 99.99"),
        ]},
    ],
    (WITHDRAW, "exception"): [
        {"group_name": "non-positive amount", "intent": "exception", "cases": [
            case("zero amount", [("amount", "0.0")], "IllegalArgumentException"),
            case("negative amount", [("amount", "-5.0")], "IllegalArgumentException"),
        ]},
        {"group_name": "frozen account", "intent": "exception", "cases": [
            case("withdrawal from a frozen account", [("state", "frozen"), ("amount", "10.0")],
                 "IllegalStateException"),
        ]},
    ],
    (TRANSFER, "branch"): [
        {"group_name": "withdrawal outcome", "intent": "branch", "cases": [
            case("source has enough money", [("from", "alice"), ("to", "bob"), ("amount", "30.0")],
                 "returns true; alice 70.0, bob 50.0"),
            case("source lacks money", [("from", "bob"), ("to", "alice"), ("amount", "50.0")],
                 "returns false; balances unchanged"),
        ]},
    ],
    (TRANSFER, "functional"): [
        {"group_name": "money is conserved", "intent": "functional", "cases": [
            case("transfer to a newly opened account", [("from", "alice"), ("to", "carol"), ("amount", "25.0")],
                 "total balance stays 120.0 and carol holds 25.0"),
        ]},
    ],
    (TRANSFER, "exception"): [
        {"group_name": "unknown accounts", "intent": "exception", "cases": [
            case("unknown source owner", [("from", "mallory"), ("to", "bob"), ("amount", "1.0")],
                 "IllegalArgumentException"),
            case("unknown target owner", [("from", "alice"), ("to", "mallory"), ("amount", "1.0")],
                 "IllegalArgumentException"),
        ]},
    ],
    (MATCH, "branch"): [
        {"group_name": "value and plain patterns", "intent": "branch", "cases": [
            case("a value pattern is matched character by character", [("pattern", "ValuePatterns(\"abd\")")], "3"),
            case("any other pattern falls back to indexOf", [("pattern", "() -> \"ca\"")], "2"),
        ]},
    ],
    (MATCH, "functional"): [
        {"group_name": "wildcard characters", "intent": "functional", "cases": [
            case("'?' matches any single character", [("pattern", "ValuePatterns(\"a?d\")")], "3"),
            case("no occurrence", [("pattern", "ValuePatterns(\"zz\")")], "-1"),
        ]},
    ],
    (MATCH, "exception"): [
        {"group_name": "null pattern", "intent": "exception", "cases": [
            case("null pattern argument", [("pattern", "null")], "NullPointerException"),
        ]},
    ],
}

MALFORMED_DESIGN = """```json
[
  {"group_name": "money is conserved", "intent": "functional", "cases": [
    {"scenario": "transfer to a newly opened account", "inputs": [], "expected": "total stays 120.0"},
  ]}
]
```"""

TRANSFORMS = {
    (WITHDRAW, "balance check outcomes"): """
import static org.junit.jupiter.api.Assertions.assertFalse;
import static org.junit.jupiter.api.Assertions.assertTrue;
import org.junit.jupiter.api.Test;

@Test
void withdrawFollowsBalanceCheck() {
    assertTrue(account.withdraw(40.0));
    assertBalance(60.0);
    assertFalse(account.withdraw(150.0));
    assertBalance(60.0);
}
""",
    (WITHDRAW, "exact balance withdrawal"): """
import static org.junit.jupiter.api.Assertions.assertTrue;
import org.junit.jupiter.api.BeforeEach;
import org.junit.jupiter.api.Test;

@BeforeEach
void setUp() {
    account = new Account("alice", 100.0);
}

@Test
void withdrawRemovesExactAmounts() {
    assertTrue(account.withdraw(0.01));
    assertBalance(99.99);
    assertTrue(account.withdraw(99.99));
    assertBalance(0.0);
}
""",
    (WITHDRAW, "non-positive amount"): """
import static org.junit.jupiter.api.Assertions.assertThrows;
import org.junit.jupiter.api.Test;

@Test
void withdrawRejectsNonPositiveAmounts() {
    assertThrows(IllegalArgumentException.class, () -> account.withdraw(0.0));
    assertThrows(IllegalArgumentException.class, () -> account.withdraw(-5.0));
    assertBalance(100.0);
}
""",
    (WITHDRAW, "frozen account"): """
import static org.junit.jupiter.api.Assertions.assertThrows;
import org.junit.jupiter.api.Test;

@Test
void withdrawFromFrozenAccountFails() {
    account.freeze();
    assertThrows(IllegalStateException.class, () -> account.withdraw(10.0));
}
""",
    (TRANSFER, "withdrawal outcome"): """
import static org.junit.jupiter.api.Assertions.assertFalse;
import static org.junit.jupiter.api.Assertions.assertTrue;
import org.junit.jupiter.api.Test;

@Test
void transferDependsOnWithdrawal() {
    assertTrue(bank.transfer("alice", "bob", 30.0));
    assertBalances(70.0, 50.0);
    assertFalse(bank.transfer("bob", "alice", 50.0));
    assertBalances(70.0, 50.0);
}
""",
    (TRANSFER, "money is conserved"): """
import toy.wrong.Account;
import org.junit.jupiter.api.Test;

@Test
void transferConservesTotalBalance() {
    Account carol = bank.openAccount("carol", 0.0);
    bank.transfer("alice", "carol", 25.0);
    assertEquals(25.0, carol.getBalance(), 1e-9);
    assertEquals(120.0, bank.totalBalance(), 1e-9);
}
""",
    (TRANSFER, "unknown accounts"): """
import static org.junit.jupiter.api.Assertions.assertThrows;
import org.junit.jupiter.api.Test;

@Test
void transferBetweenUnknownAccountsFails() {
    assertThrows(IllegalArgumentException.class, () -> bank.transfer("mallory", "bob", 1.0));
    assertThrows(IllegalArgumentException.class, () -> bank.transfer("alice", "mallory", 1.0));
    assertBalances(100.0, 20.0);
}
""",
    (MATCH, "value and plain patterns"): """
import static org.junit.jupiter.api.Assertions.assertEquals;
import org.junit.jupiter.api.Test;

@Test
void valueAndPlainPatternsTakeDifferentPaths() {
    assertEquals(4, matcher.findMatchPattern(new PatternMatcher.ValuePatterns("abd")));
    assertEquals(2, matcher.findMatchPattern(() -> "ca"));
    assertEquals(-1, matcher.getLastMatch());
}
""",
    (MATCH, "wildcard characters"): """
import static org.junit.jupiter.api.Assertions.assertEquals;
import org.junit.jupiter.api.Test;

@Test
void wildcardMatchesAnyCharacter() {
    assertEquals(3, Parser.parse("a?d", true).length);
    assertEquals(3, matcher.findMatchPattern(new PatternMatcher.ValuePatterns("a?d")));
    assertEquals(-1, matcher.findMatchPattern(new PatternMatcher.ValuePatterns("zz")));
}
""",
    (MATCH, "null pattern"): """
import static org.junit.jupiter.api.Assertions.assertThrows;
import org.junit.jupiter.api.Test;

@Test
void nullPatternIsRejected() {
    assertThrows(NullPointerException.class, () -> matcher.findMatchPattern(null));
}
""",
}

# repairs the scripted model makes, applied to the class it is shown
REPAIRS = [
    ('Parser.parse("a?d", true)', 'Parser.parse("a?d")'),
    ('assertEquals(4, matcher.findMatchPattern(new PatternMatcher.ValuePatterns("abd")));',
     'assertEquals(3, matcher.findMatchPattern(new PatternMatcher.ValuePatterns("abd")));'),
]


class AuthorBackend:
    """Answers pipeline prompts from the scripted material above."""

    def complete(self, request: ChatRequest) -> ChatResponse:
        first = request.messages[0][1]
        retry = len(request.messages) > 1
        # the focal signature is the first one a prompt mentions
        focal = min((first.find(sig), f) for sig, f in SIGNATURES.items() if sig in first)[1]
        if first.startswith("## Core Task and Instructions"):
            if focal == TRANSFER and not retry:
                return ChatResponse(FRAMEWORK_PROSE)
            return ChatResponse(fenced("java", FRAMEWORKS[focal], before="Here is the framework."))
        if "## Design Guidance" in first:
            view = re.search(r'"intent": "(\w+)"', first).group(1)
            if (focal, view) == (TRANSFER, "functional") and not retry:
                return ChatResponse(MALFORMED_DESIGN)
            return ChatResponse(fenced("json", json.dumps(DESIGNS[(focal, view)], indent=2)))
        if "## Test Case Group" in first:
            group = re.search(r'"group_name": "([^"]+)"', first).group(1)
            return ChatResponse(fenced("java", TRANSFORMS[(focal, group)]))
        if "## Failing Test Class" in first:
            source = re.search(r"## Failing Test Class\n```java\n(.*?)\n```", first, re.DOTALL).group(1)
            for old, new in REPAIRS:
                if old in source:
                    source = source.replace(old, new)
                    break
            return ChatResponse(fenced("java", source, before="The corrected class:"))
        raise AssertionError("unrecognized prompt")


# ---------------------------------------------------------------------------
# scripted build


def _line_of(source: str, needle: str) -> tuple[int, str, int]:
    for no, line in enumerate(source.splitlines(), 1):
        col = line.find(needle)
        if col >= 0:
            return no, line, col
    raise AssertionError(needle)


def _rel(source: str, name: str) -> str:
    pkg = re.search(r"^package ([\w.]+);", source, re.MULTILINE).group(1)
    return "src/test/java/" + pkg.replace(".", "/") + f"/{name}.java"


def javac_errors(errors: list[str]) -> str:
    n = len(errors)
    return "".join(errors) + f"{n} error{'s' if n > 1 else ''}\n"


def compile_outcome(source: str, name: str) -> tuple[int, str]:
    rel = _rel(source, name)
    if "import toy.wrong.Account;" in source:
        no, _, col = _line_of(source, "import toy.wrong.Account;")
        out = (
            "[INFO] --- maven-compiler-plugin:3.11.0:testCompile (default-testCompile) @ toy ---\n"
            "[INFO] Changes detected - recompiling the module! :dependency\n"
            "[INFO] Compiling 1 source file with javac [debug target 17] to target/test-classes\n"
            "[INFO] -------------------------------------------------------------\n"
            "[ERROR] COMPILATION ERROR : \n"
            "[INFO] -------------------------------------------------------------\n"
            f"[ERROR] /work/{rel}:[{no},{col + 17}] package toy.wrong does not exist\n"
            "[INFO] 1 error\n"
            "[INFO] -------------------------------------------------------------\n"
            "[INFO] BUILD FAILURE\n"
        )
        return 1, out
    if "Parser." in source and "import toy.text.Parser;" not in source:
        errors = []
        for no, line in enumerate(source.splitlines(), 1):
            col = line.find("Parser.")
            if col >= 0:
                errors.append(f"{rel}:{no}: error: cannot find symbol\n{line}\n{' ' * col}^\n"
                              f"  symbol:   variable Parser\n  location: class {name}\n")
        return 1, javac_errors(errors)
    if 'Parser.parse("a?d", true)' in source:
        no, line, col = _line_of(source, 'Parser.parse("a?d", true)')
        return 1, javac_errors([
            f"{rel}:{no}: error: method parse in class Parser cannot be applied to given types;\n"
            f"{line}\n{' ' * (col + 6)}^\n"
            "  required: String\n  found:    String,boolean\n"
            "  reason: actual and formal argument lists differ in length\n"
        ])
    return 0, ""


COVERAGE = {
    # method name, descriptor, (LINE covered, missed), (BRANCH covered, missed), (instructions covered, missed)
    WITHDRAW: ("toy/bank", "Account", "withdraw", "(D)Z", 61, (6, 0), (4, 0), (21, 0)),
    TRANSFER: ("toy/bank", "Bank", "transfer", "(Ljava/lang/String;Ljava/lang/String;D)Z", 35, (9, 1), (6, 2), (36, 8)),
    MATCH: ("toy/match", "PatternMatcher", "findMatchPattern", "(Ltoy/match/PatternMatcher$Patterns;)I", 38,
            (7, 0), (2, 0), (25, 0)),
}


def jacoco_report(focal: str) -> str:
    pkg, cls, method, desc, line, lc, bc, ic = COVERAGE[focal]
    def counters(pairs):
        return "".join(f'<counter type="{t}" missed="{m}" covered="{c}"/>' for t, (c, m) in pairs)
    other = '<method name="&lt;init&gt;" desc="(Ljava/lang/String;)V" line="30">' + counters(
        [("INSTRUCTION", (9, 0)), ("LINE", (4, 0)), ("COMPLEXITY", (1, 0)), ("METHOD", (1, 0))]) + "</method>"
    target = f'<method name="{method}" desc="{desc}" line="{line}">' + counters(
        [("INSTRUCTION", ic), ("BRANCH", bc), ("LINE", lc), ("COMPLEXITY", (bc[0] // 2 + 1, bc[1] // 2)), ("METHOD", (1, 0))]
    ) + "</method>"
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?><!DOCTYPE report PUBLIC "-//JACOCO//DTD Report 1.1//EN" '
        '"report.dtd"><report name="toy"><sessioninfo id="build-1" start="1718000000000" dump="1718000001000"/>'
        f'<package name="{pkg}"><class name="{pkg}/{cls}" sourcefilename="{cls}.java">{other}{target}'
        f'{counters([("INSTRUCTION", ic), ("BRANCH", bc), ("LINE", lc), ("METHOD", (2, 0)), ("CLASS", (1, 0))])}</class>'
        f'<sourcefile name="{cls}.java">{counters([("LINE", lc)])}</sourcefile>'
        f'{counters([("LINE", lc), ("CLASS", (1, 0))])}</package>'
        f'{counters([("LINE", lc), ("CLASS", (1, 0))])}</report>'
    )


def surefire(source: str, name: str) -> tuple[int, str]:
    pkg = re.search(r"^package ([\w.]+);", source, re.MULTILINE).group(1)
    fq = f"{pkg}.{name}"
    n = source.count("@Test")
    head = ("[INFO] -------------------------------------------------------\n"
            "[INFO]  T E S T S\n"
            "[INFO] -------------------------------------------------------\n"
            f"[INFO] Running {fq}\n")
    bad = 'assertEquals(4, matcher.findMatchPattern(new PatternMatcher.ValuePatterns("abd")));'
    if bad in source:
        no, _, _ = _line_of(source, bad)
        test = "valueAndPlainPatternsTakeDifferentPaths"
        return 1, head + (
            f"[ERROR] Tests run: {n}, Failures: 1, Errors: 0, Skipped: 0, Time elapsed: 0.047 s <<< FAILURE! - in {fq}\n"
            f"[ERROR] {fq}.{test}  Time elapsed: 0.006 s  <<< FAILURE!\n"
            "org.opentest4j.AssertionFailedError: expected: <4> but was: <3>\n"
            "\tat org.junit.jupiter.api.AssertionFailureBuilder.build(AssertionFailureBuilder.java:151)\n"
            "\tat org.junit.jupiter.api.AssertionFailureBuilder.buildAndThrow(AssertionFailureBuilder.java:132)\n"
            "\tat org.junit.jupiter.api.AssertEquals.failNotEqual(AssertEquals.java:197)\n"
            "\tat org.junit.jupiter.api.AssertEquals.assertEquals(AssertEquals.java:150)\n"
            "\tat org.junit.jupiter.api.AssertEquals.assertEquals(AssertEquals.java:145)\n"
            "\tat org.junit.jupiter.api.Assertions.assertEquals(Assertions.java:528)\n"
            f"\tat {fq}.{test}({name}.java:{no})\n"
            "\n"
            "[INFO] \n"
            "[INFO] Results:\n"
            "[INFO] \n"
            "[ERROR] Failures: \n"
            f"[ERROR]   {name}.{test}:{no} expected: <4> but was: <3>\n"
            "[INFO] \n"
            f"[ERROR] Tests run: {n}, Failures: 1, Errors: 0, Skipped: 0\n"
            "[INFO] \n"
            "[INFO] BUILD FAILURE\n"
        )
    return 0, head + (
        f"[INFO] Tests run: {n}, Failures: 0, Errors: 0, Skipped: 0, Time elapsed: 0.052 s - in {fq}\n"
        "[INFO] \n"
        "[INFO] Results:\n"
        "[INFO] \n"
        f"[INFO] Tests run: {n}, Failures: 0, Errors: 0, Skipped: 0\n"
        "[INFO] \n"
        "[INFO] BUILD SUCCESS\n"
    )


class AuthorBuilder:
    """Decides build outcomes from the source text and records each run."""

    def __init__(self, focal: str, transcripts: dict[str, dict], workdir: Path):
        self.focal = focal
        self.transcripts = transcripts
        self.coverage = workdir / "target" / "site" / "jacoco" / "jacoco.xml"

    def compile(self, test_file: Path) -> BuildResult:
        source = test_file.read_text(encoding="utf-8")
        code, out = compile_outcome(source, test_file.stem)
        self.transcripts.setdefault(source_digest(source), {})["compile"] = {"exit_code": code, "output": out}
        return BuildResult(code, out)

    def test(self, test_file: Path) -> BuildResult:
        source = test_file.read_text(encoding="utf-8")
        code, out = surefire(source, test_file.stem)
        entry = self.transcripts.setdefault(source_digest(source), {})
        entry["test"] = {"exit_code": code, "output": out}
        if code == 0:
            entry["coverage"] = jacoco_report(self.focal)
            self.coverage.parent.mkdir(parents=True, exist_ok=True)
            self.coverage.write_text(entry["coverage"], encoding="utf-8")
        return BuildResult(code, out)


def record() -> None:
    cfg = load_config(TOY / "ktforge.toml")
    llm_dir = cfg.path(cfg.gateway.fixture_dir)
    build_dir = TOY / "fixtures" / "build"
    for d in (llm_dir, build_dir):
        if d.exists():
            shutil.rmtree(d)
        d.mkdir(parents=True)
    ctx = PipelineContext.load(cfg)
    transcripts: dict[str, dict] = {}
    author = AuthorBackend()

    class Recording(GatewayFactory):
        def __call__(self, focal_id):
            from ktforge.gateway import Gateway
            return Gateway(RecordBackend(author, ReplayFixture(), self.fixture_path(focal_id)),
                           cfg.gateway.model, cfg.gateway.temperature)

    with tempfile.TemporaryDirectory() as tmp:
        for focal in cfg.focal_methods:
            a = run_focal(focal, ctx, Recording(cfg), lambda w, f=focal: AuthorBuilder(f, transcripts, w), Path(tmp))
            print(f"recorded {focal}: {a.status}, {a.iterations_used} iteration(s)")
    for digest, entry in sorted(transcripts.items()):
        (build_dir / f"{digest}.json").write_text(json.dumps(entry, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def goldens() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        code = cli_main(["-c", str(TOY / "ktforge.toml"), "generate", "--all", "--backend", "replay", "-o", tmp])
        if code != 0:
            sys.exit(f"replay run failed with exit code {code}")
        if GOLDEN.exists():
            shutil.rmtree(GOLDEN)
        for d in sorted(Path(tmp).iterdir()):
            target = GOLDEN / d.name
            target.mkdir(parents=True)
            for name in sorted(p.name for p in d.iterdir() if p.is_file() and p.name not in ("result.json",)):
                if name == "transcript.jsonl":
                    continue
                shutil.copy(d / name, target / name)
    print(f"goldens written to {GOLDEN.relative_to(REPO)}")


if __name__ == "__main__":
    record()
    goldens()
