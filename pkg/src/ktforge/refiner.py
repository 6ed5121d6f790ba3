"""Compile/execute validation and the bounded repair loop."""
from __future__ import annotations

import difflib
import hashlib
import json
import logging
import re
import shlex
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Protocol, Sequence

from .gateway import Gateway, GatewayError
from .knowledge import FunctionIndex

log = logging.getLogger(__name__)

PASSED, FAILING, COMPILE_ERROR = "compiled+passed", "compiled+failing", "compile-error"


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # compile | runtime | assertion
    file: Optional[str]
    line: Optional[int]
    symbol: Optional[str]
    message: str
    test: Optional[str] = None
    stack: tuple[str, ...] = ()

    def render(self) -> str:
        where = f"{self.file}:{self.line}" if self.file and self.line else (self.file or "?")
        head = f"[{self.kind}] {where}: {self.message}"
        if self.test:
            head += f" (in {self.test})"
        if self.symbol and self.kind == "compile":
            head += f" [symbol {self.symbol}]"
        return "\n".join([head] + [f"    at {s}" for s in self.stack])


# ---------------------------------------------------------------------------
# diagnostics parsing

_JAVAC = re.compile(r"^(?P<file>[^\s:\[][^:\n]*\.java):(?P<line>\d+): error: (?P<msg>.*)$")
_MAVEN = re.compile(r"^\[ERROR\] (?P<file>\S+\.java):\[(?P<line>\d+),(?P<col>\d+)\] (?P<msg>.*)$")
_SYMBOL = re.compile(r"^(?:\[ERROR\])?\s*symbol:\s+(?:class|variable|method|interface|enum)?\s*(?P<name>[\w$]+)")
_SUREFIRE = re.compile(
    r"^(?:\[ERROR\] )?(?:(?P<cls>[\w$.]+)\.(?P<m1>[\w$]+)|(?P<m2>[\w$]+)\((?P<cls2>[\w$.]+)\))"
    r"\s+(?:--\s+)?Time elapsed: .*<<< (?P<kind>FAILURE|ERROR)!\s*$"
)
_CONSOLE_TEST = re.compile(r"^\s*JUnit (?:Jupiter|Vintage):(?P<cls>[\w$]+):(?P<test>[\w$]+)\(.*\)\s*$")
_CONSOLE_EXC = re.compile(r"^\s*=> (?P<msg>.+)$")
_CONSOLE_SOURCE = re.compile(r"^\s*MethodSource \[className = '(?P<cls>[\w$.]+)'")
_FRAME = re.compile(r"^\s*(?:at\s+)?(?P<frame>[\w$.<>]+\((?P<file>[\w$]+\.java):(?P<line>\d+)\))\s*$")
_ASSERTION_TYPES = ("AssertionFailedError", "AssertionError", "ComparisonFailure", "MultipleFailuresError")
_PKG_MISSING = re.compile(r"^package ([\w.]+) does not exist$")
_IMPORT_ECHO = re.compile(r"^\s*import\s+(?:static\s+)?[\w.]+\.([\w$]+)\s*;")


def parse_diagnostics(raw: str) -> list[Diagnostic]:
    lines = raw.splitlines()
    out: list[Diagnostic] = []
    i = 0
    while i < len(lines):
        line = lines[i]
        m = _JAVAC.match(line) or _MAVEN.match(line)
        if m:
            msg = m.group("msg").strip()
            symbol = None
            j = i + 1
            while j < len(lines) and not (_JAVAC.match(lines[j]) or _MAVEN.match(lines[j])) and j <= i + 6:
                sm = _SYMBOL.match(lines[j])
                if sm:
                    symbol = sm.group("name")
                    break
                j += 1
            if symbol is None and _PKG_MISSING.match(msg) and i + 1 < len(lines):
                echo = _IMPORT_ECHO.match(lines[i + 1])
                if echo:
                    symbol = echo.group(1)
            out.append(Diagnostic("compile", m.group("file"), int(m.group("line")), symbol, msg))
            i += 1
            continue
        m = _SUREFIRE.match(line)
        if m:
            cls = m.group("cls") or m.group("cls2")
            test = m.group("m1") or m.group("m2")
            kind = "assertion" if m.group("kind") == "FAILURE" else "runtime"
            block, i = _block(lines, i + 1, lambda s: bool(_SUREFIRE.match(s)) or s.startswith("[INFO]") or s.startswith("[ERROR] Tests run") or s.startswith("[ERROR] Failures:") or s.startswith("[ERROR] Errors:"))
            out.append(_runtime_diag(kind, cls, test, block))
            continue
        m = _CONSOLE_TEST.match(line)
        if m:
            block, i = _block(lines, i + 1, lambda s: bool(_CONSOLE_TEST.match(s)) or not s.strip())
            exc = next((_CONSOLE_EXC.match(b).group("msg") for b in block if _CONSOLE_EXC.match(b)), "")
            kind = "assertion" if any(t in exc.split(":", 1)[0] for t in _ASSERTION_TYPES) else "runtime"
            rest = [b for b in block if not _CONSOLE_EXC.match(b) and "MethodSource" not in b]
            source = next((_CONSOLE_SOURCE.match(b).group("cls") for b in block if _CONSOLE_SOURCE.match(b)), m.group("cls"))
            out.append(_runtime_diag(kind, source, m.group("test"), [exc] + rest))
            continue
        i += 1
    # Maven repeats every compiler error in its closing "Failed to execute goal" block
    return list(dict.fromkeys(out))


def _block(lines: list[str], i: int, stop: Callable[[str], bool]) -> tuple[list[str], int]:
    block = []
    while i < len(lines) and not stop(lines[i]):
        if lines[i].strip():
            block.append(lines[i])
        i += 1
    return block, i


def _runtime_diag(kind: str, cls: str, test: str, block: list[str]) -> Diagnostic:
    message = block[0].strip() if block else ""
    frames = [m for m in (_FRAME.match(b) for b in block[1:]) if m]
    simple = cls.rsplit(".", 1)[-1]
    file = line = None
    for f in frames:
        if f.group("file") == f"{simple}.java":
            file, line = f.group("file"), int(f.group("line"))
            break
    stack = tuple(f.group("frame") for f in frames[:5])
    return Diagnostic(kind, file, line, test, message, test=f"{cls}.{test}", stack=stack)


# ---------------------------------------------------------------------------
# rule-based import repair


def choose_import(candidates: Sequence[str], focal_package: str) -> str:
    same = sorted(c for c in candidates if c.rsplit(".", 1)[0] == focal_package)
    if same:
        return same[0]
    return sorted(candidates, key=lambda c: (len(c), c))[0]


_IMPORT = re.compile(r"^import\s+([\w$.]+)\s*;[ \t]*$", re.MULTILINE)
_ANY_IMPORT = re.compile(r"^import\s+(?:static\s+)?[\w$.*]+\s*;[ \t]*$", re.MULTILINE)
_PACKAGE = re.compile(r"^package\s+[\w.]+\s*;[ \t]*$", re.MULTILINE)


def _missing_symbols(source: str, diagnostics: Sequence[Diagnostic]) -> list[str]:
    symbols: list[str] = []
    for d in diagnostics:
        if d.kind != "compile":
            continue
        names: list[str] = []
        pkg = _PKG_MISSING.match(d.message)
        if d.symbol and (d.message.startswith("cannot find symbol") or pkg):
            names.append(d.symbol)
        elif pkg:
            names += [qn.rsplit(".", 1)[-1] for qn in _IMPORT.findall(source) if qn.rsplit(".", 1)[0] == pkg.group(1)]
        for n in names:
            if n[:1].isupper() and n not in symbols:
                symbols.append(n)
    return symbols


def rule_based_repair(source: str, diagnostics: Sequence[Diagnostic], index: FunctionIndex,
                      focal_package: str) -> tuple[str, list[tuple[str, str]]]:
    """Add or correct imports for unresolved simple class names; returns (source, [(symbol, import)])."""
    fixed: list[tuple[str, str]] = []
    for symbol in _missing_symbols(source, diagnostics):
        qns = index.lookup_simple_class(symbol)
        if not qns:
            continue
        chosen = choose_import(sorted(qns), focal_package)
        current = [m for m in _IMPORT.finditer(source) if m.group(1).rsplit(".", 1)[-1] == symbol]
        if any(m.group(1) == chosen for m in current):
            continue  # already imported; something else is wrong
        own = _PACKAGE.search(source)
        same_package = own is not None and own.group(0).split()[1].rstrip(";") == chosen.rsplit(".", 1)[0]
        if current:
            m = current[0]
            if same_package:  # visible without an import
                end = m.end() + 1 if source[m.end():m.end() + 1] == "\n" else m.end()
                source = source[: m.start()] + source[end:]
            else:
                source = source[: m.start()] + f"import {chosen};" + source[m.end():]
        elif not same_package:
            source = _insert_import(source, chosen)
        else:
            continue  # same-package class that is not imported: nothing an import can fix
        fixed.append((symbol, chosen))
    return source, fixed


def _insert_import(source: str, qn: str) -> str:
    line = f"import {qn};"
    imports = list(_ANY_IMPORT.finditer(source))
    if imports:
        end = imports[-1].end()
        return source[:end] + "\n" + line + source[end:]
    pkg = _PACKAGE.search(source)
    if pkg:
        return source[: pkg.end()] + "\n\n" + line + source[pkg.end():]
    return line + "\n\n" + source


# ---------------------------------------------------------------------------
# build adapters


@dataclass(frozen=True)
class BuildResult:
    exit_code: int
    output: str
    timed_out: bool = False

    @property
    def ok(self) -> bool:
        return self.exit_code == 0 and not self.timed_out


class Builder(Protocol):
    def compile(self, test_file: Path) -> BuildResult: ...
    def test(self, test_file: Path) -> BuildResult: ...


@dataclass
class BuildAdapter:
    """Runs configurable compile/test command templates in ``workdir``.

    Templates may use ``{test_file}``, ``{class_path}``, ``{workdir}``,
    ``{python}`` (the running interpreter) and any key of ``placeholders``.
    """

    compile_command: str
    test_command: str
    workdir: Path
    timeout_s: float = 120.0
    class_path: str = ""
    placeholders: dict[str, str] = field(default_factory=dict)

    def _run(self, template: str, test_file: Path) -> BuildResult:
        cmd = template.format(**self.placeholders, test_file=str(test_file), class_path=self.class_path,
                              workdir=str(self.workdir), python=sys.executable)
        try:
            proc = subprocess.run(shlex.split(cmd), cwd=self.workdir, capture_output=True, text=True,
                                  timeout=self.timeout_s)
        except subprocess.TimeoutExpired as exc:
            out = exc.stdout.decode() if isinstance(exc.stdout, bytes) else (exc.stdout or "")
            return BuildResult(-1, out, timed_out=True)
        except OSError as exc:
            return BuildResult(127, f"cannot run build command {cmd!r}: {exc}")
        return BuildResult(proc.returncode, proc.stdout + proc.stderr)

    def compile(self, test_file: Path) -> BuildResult:
        return self._run(self.compile_command, test_file)

    def test(self, test_file: Path) -> BuildResult:
        return self._run(self.test_command, test_file)


def source_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class ScriptedBuildAdapter:
    """In-process fake keyed by the digest of the test file's content."""

    transcripts: dict[str, dict]
    coverage_to: Optional[Path] = None
    calls: list[tuple[str, str]] = field(default_factory=list)

    @classmethod
    def from_dir(cls, directory: str | Path, coverage_to: Optional[Path] = None) -> "ScriptedBuildAdapter":
        entries = {p.stem: json.loads(p.read_text(encoding="utf-8")) for p in sorted(Path(directory).glob("*.json"))}
        return cls(entries, coverage_to)

    def _result(self, stage: str, test_file: Path) -> BuildResult:
        digest = source_digest(Path(test_file).read_text(encoding="utf-8"))
        self.calls.append((stage, digest))
        entry = self.transcripts.get(digest)
        if entry is None or stage not in entry:
            return BuildResult(2, f"fakebuild: no {stage} transcript for {digest}\n")
        step = entry[stage]
        if step.get("timeout"):
            return BuildResult(-1, step.get("output", ""), timed_out=True)
        if stage == "test" and self.coverage_to is not None and "coverage" in entry:
            self.coverage_to.parent.mkdir(parents=True, exist_ok=True)
            self.coverage_to.write_text(entry["coverage"], encoding="utf-8")
        return BuildResult(int(step["exit_code"]), step.get("output", ""))

    def compile(self, test_file: Path) -> BuildResult:
        return self._result("compile", test_file)

    def test(self, test_file: Path) -> BuildResult:
        return self._result("test", test_file)


# ---------------------------------------------------------------------------
# repair loop


@dataclass(frozen=True)
class RepairStep:
    iteration: int
    diagnostics: tuple[Diagnostic, ...]
    strategies: tuple[str, ...]  # ordered: "rule" before "llm"
    summary: str
    failed: bool = False


@dataclass
class RepairOutcome:
    iterations_used: int
    final_status: str
    final_source: str
    history: list[RepairStep]
    last_output: str = ""


@dataclass
class RepairContext:
    index: FunctionIndex
    focal_package: str
    focal_source: str
    signatures: list[str]
    repair_template: Callable[..., str]
    transcript: Optional[list] = None


def _diff_summary(before: str, after: str) -> str:
    if before == after:
        return "no change"
    added = removed = 0
    for line in difflib.unified_diff(before.splitlines(), after.splitlines(), lineterm="", n=0):
        if line.startswith("+") and not line.startswith("+++"):
            added += 1
        elif line.startswith("-") and not line.startswith("---"):
            removed += 1
    return f"+{added} -{removed} lines"


def llm_repair(source: str, diagnostics: Sequence[Diagnostic], raw: str, phase: str, ctx: RepairContext,
               gateway: Gateway) -> Optional[str]:
    """Ask the model for a corrected class; None when no usable code comes back."""
    from .pipeline.stages import extract_code_block

    prompt = ctx.repair_template(
        phase=phase,
        source=source.rstrip("\n"),
        diagnostics="\n".join(d.render() for d in diagnostics) or raw.strip(),
        focal_source=ctx.focal_source,
        signatures="\n".join(ctx.signatures) or "(none)",
    )
    request = gateway.request([("user", prompt)])
    try:
        response = gateway.complete(request)
    except GatewayError as exc:
        log.warning("repair request failed: %s", exc)
        if ctx.transcript is not None:
            ctx.transcript.append({"stage": "repair", "request": request.to_json(), "error": str(exc)})
        return None
    if ctx.transcript is not None:
        ctx.transcript.append({"stage": "repair", "request": request.to_json(), "response": response.content})
    code = extract_code_block(response.content)
    return code if code is None else code.rstrip("\n") + "\n"


def _check(source: str, test_file: Path, builder: Builder) -> tuple[str, list[Diagnostic], str]:
    """Compile then run; returns (status, diagnostics, raw output)."""
    test_file.parent.mkdir(parents=True, exist_ok=True)
    test_file.write_text(source, encoding="utf-8")
    result = builder.compile(test_file)
    if not result.ok:
        if result.timed_out:
            return COMPILE_ERROR, [Diagnostic("runtime", test_file.name, None, None, "timeout")], result.output
        diags = [d for d in parse_diagnostics(result.output) if d.kind == "compile"]
        if not diags:
            diags = [Diagnostic("compile", test_file.name, None, None, _tail(result.output))]
        return COMPILE_ERROR, diags, result.output
    result = builder.test(test_file)
    if result.ok:
        return PASSED, [], result.output
    if result.timed_out:
        return FAILING, [Diagnostic("runtime", test_file.name, None, None, "timeout")], result.output
    diags = [d for d in parse_diagnostics(result.output) if d.kind != "compile"]
    if not diags:
        diags = [Diagnostic("runtime", test_file.name, None, None, _tail(result.output))]
    return FAILING, diags, result.output


def _tail(text: str, n: int = 20) -> str:
    lines = [l for l in text.strip().splitlines() if l.strip()]
    return "\n".join(lines[-n:]) or "build failed without output"


def refine(source: str, test_file: Path, builder: Builder, gateway: Gateway, ctx: RepairContext, cap: int = 5) -> RepairOutcome:
    """Validate and repair; one iteration is one compile-execute-repair cycle."""
    history: list[RepairStep] = []
    status, diags, raw = _check(source, test_file, builder)
    while status != PASSED and len(history) < cap:
        iteration = len(history) + 1
        strategies: list[str] = []
        before = source
        failed = False
        remaining = list(diags)
        if status == COMPILE_ERROR:
            source, fixed = rule_based_repair(source, diags, ctx.index, ctx.focal_package)
            if fixed:
                strategies.append("rule")
                done = {s for s, _ in fixed}
                remaining = [d for d in diags if not (d.symbol in done or _fixed_package(d, before, done))]
        if remaining:
            strategies.append("llm")
            phase = "compile" if status == COMPILE_ERROR else "pass its tests"
            repaired = llm_repair(source, remaining, raw, phase, ctx, gateway)
            if repaired is None:
                failed = True
            else:
                source = repaired
        history.append(RepairStep(iteration, tuple(diags), tuple(strategies), _diff_summary(before, source), failed))
        status, diags, raw = _check(source, test_file, builder)
    return RepairOutcome(len(history), status, source, history, raw)


def _fixed_package(d: Diagnostic, source: str, done: set[str]) -> bool:
    """A 'package does not exist' error whose imports were all corrected."""
    pkg = _PKG_MISSING.match(d.message) if d.kind == "compile" else None
    if not pkg:
        return False
    names = [qn.rsplit(".", 1)[-1] for qn in _IMPORT.findall(source) if qn.rsplit(".", 1)[0] == pkg.group(1)]
    return bool(names) and all(n in done for n in names)
