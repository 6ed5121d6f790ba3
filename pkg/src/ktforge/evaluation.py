"""Batch metrics (pass rates, coverage, cost) and coverage-report parsing."""
from __future__ import annotations

import csv
import io
import json
import xml.etree.ElementTree as ET
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .knowledge import base_type

METRICS = ("CPR", "EPR", "LC", "BC", "LCP", "BCP", "AvT", "AvTC")


class EmptyBatch(ValueError):
    pass


class MissingCoverageEntry(LookupError):
    pass


@dataclass(frozen=True)
class TaskResult:
    focal_id: str
    compiled: bool
    executed_clean: bool
    line_counters: Optional[tuple[int, int]]  # (covered, missed)
    branch_counters: Optional[tuple[int, int]]
    wall_time_s: float
    test_case_count: int

    def __post_init__(self):
        if self.executed_clean and not self.compiled:
            raise ValueError("a task cannot execute cleanly without compiling")
        for counters in (self.line_counters, self.branch_counters):
            if counters is not None and min(counters) < 0:
                raise ValueError("coverage counters must be nonnegative")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "TaskResult":
        lc, bc = data.get("line_counters"), data.get("branch_counters")
        return cls(data["focal_id"], bool(data["compiled"]), bool(data["executed_clean"]),
                   tuple(lc) if lc else None, tuple(bc) if bc else None,
                   float(data["wall_time_s"]), int(data["test_case_count"]))


def _pct(counters: Optional[tuple[int, int]]) -> Fraction:
    if not counters or sum(counters) == 0:
        return Fraction(0)
    covered, missed = counters
    return Fraction(100 * covered, covered + missed)


def _to_fraction(x: float | int) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class MetricsReport:
    CPR: Fraction
    EPR: Fraction
    LC: Fraction
    BC: Fraction
    LCP: Fraction
    BCP: Fraction
    AvT: Fraction
    AvTC: Fraction
    tasks: int = 0

    def rendered(self) -> dict[str, str]:
        return {m: fmt2(getattr(self, m)) for m in METRICS}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(METRICS)
        writer.writerow([self.rendered()[m] for m in METRICS])
        return buf.getvalue()


def fmt2(value: Fraction) -> str:
    """Two-decimal rendering with half-up rounding of the exact value."""
    with localcontext() as ctx:
        ctx.prec = 50
        d = Decimal(value.numerator) / Decimal(value.denominator)
        return str(d.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def compute_metrics(results: Sequence[TaskResult]) -> MetricsReport:
    """Pass rates over all tasks; LC/BC average every task (non-compiling ones count 0),
    LCP/BCP average only the cleanly executing tasks."""
    n = len(results)
    if n == 0:
        raise EmptyBatch("no task results to aggregate")
    compiled = [r for r in results if r.compiled]
    clean = [r for r in results if r.executed_clean]

    def line(r: TaskResult) -> Fraction:
        return _pct(r.line_counters) if r.compiled else Fraction(0)

    def branch(r: TaskResult) -> Fraction:
        return _pct(r.branch_counters) if r.compiled else Fraction(0)

    def mean(values: list[Fraction]) -> Fraction:
        return sum(values, Fraction(0)) / len(values) if values else Fraction(0)

    return MetricsReport(
        CPR=Fraction(100 * len(compiled), n),
        EPR=Fraction(100 * len(clean), n),
        LC=mean([line(r) for r in results]),
        BC=mean([branch(r) for r in results]),
        LCP=mean([line(r) for r in clean]),
        BCP=mean([branch(r) for r in clean]),
        AvT=mean([_to_fraction(r.wall_time_s) for r in results]),
        AvTC=mean([Fraction(r.test_case_count) for r in results]),
        tasks=n,
    )


# ---------------------------------------------------------------------------
# JaCoCo XML

_DESCRIPTOR_PRIMS = {"B": "byte", "C": "char", "D": "double", "F": "float", "I": "int", "J": "long", "S": "short", "Z": "boolean"}


def descriptor_params(desc: str) -> list[str]:
    """Simple parameter type names of a JVM method descriptor, e.g. (I[Ljava/lang/String;)V."""
    out: list[str] = []
    i = desc.index("(") + 1
    end = desc.index(")")
    while i < end:
        dims = 0
        while desc[i] == "[":
            dims += 1
            i += 1
        if desc[i] == "L":
            j = desc.index(";", i)
            name = desc[i + 1 : j].rsplit("/", 1)[-1].rsplit("$", 1)[-1]
            i = j + 1
        else:
            name = _DESCRIPTOR_PRIMS[desc[i]]
            i += 1
        out.append(name + "[]" * dims)
    return out


def id_params(callable_id: str) -> list[str]:
    inner = callable_id[callable_id.index("(") + 1 : callable_id.rindex(")")]
    parts, depth, cur = [], 0, ""
    for ch in inner:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        parts.append(cur)
    out = []
    for p in parts:
        name, dims = base_type(p)
        out.append(name.rsplit(".", 1)[-1] + "[]" * dims)
    return out


def _counters(elem: ET.Element) -> dict[str, tuple[int, int]]:
    return {c.get("type"): (int(c.get("covered")), int(c.get("missed"))) for c in elem.findall("counter")}


def parse_coverage_report(report: str | Path, focal_id: str) -> tuple[tuple[int, int], tuple[int, int]]:
    """(line, branch) counters of the focal method; missing counters read as (0, 0)."""
    text = Path(report).read_text(encoding="utf-8") if isinstance(report, Path) else report
    root = ET.fromstring(text)
    cls_qn, rest = focal_id.split("#", 1)
    name = rest.split("(", 1)[0]
    params = id_params(focal_id)
    vm_names = _vm_class_names(cls_qn)
    for cls in root.iter("class"):
        if cls.get("name") not in vm_names:
            continue
        for method in cls.findall("method"):
            if method.get("name") == name and descriptor_params(method.get("desc", "()V")) == params:
                counters = _counters(method)
                return counters.get("LINE", (0, 0)), counters.get("BRANCH", (0, 0))
    raise MissingCoverageEntry(f"{focal_id} not found in coverage report")


def _vm_class_names(qn: str) -> set[str]:
    """Candidate VM names: any split of trailing segments into nested classes."""
    parts = qn.split(".")
    return {"/".join(parts[:k]) + ("$" + "$".join(parts[k:]) if parts[k:] else "") for k in range(1, len(parts) + 1)}


def load_results(directory: str | Path) -> list[TaskResult]:
    """Every ``result.json`` below ``directory``."""
    return [TaskResult.from_json(json.loads(p.read_text(encoding="utf-8"))) for p in sorted(Path(directory).rglob("result.json"))]


def write_report(results: Iterable[TaskResult], path: str | Path) -> MetricsReport:
    report = compute_metrics(list(results))
    Path(path).write_text(report.to_csv(), encoding="utf-8")
    return report
