"""Per-focal orchestration of the five generation stages and artifact output."""
from __future__ import annotations

import json
import logging
import re
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..config import Config
from ..evaluation import MissingCoverageEntry, TaskResult, parse_coverage_report
from ..frontend.model import parse_project
from ..gateway import Backend, Gateway, LiveBackend, RecordBackend, ReplayBackend, ReplayFixture
from ..integrator import FrameworkSyntaxError, integrate, parse_test_class
from ..knowledge import FunctionIndex, build_index
from ..refiner import COMPILE_ERROR, FAILING, PASSED, BuildAdapter, Builder, RepairContext, RepairOutcome, refine
from ..retrieval import UnknownFocal, assemble_usage_context
from ..usage import CallGraph, build_call_graph, usage_traces
from .stages import (Exchange, FrameworkParseError, TestCaseGroup, TestClassFramework, Templates,
                     build_framework_prompt, design_test_cases, exchange_json, existing_test_setup, focal_source,
                     generate_framework, ir_dump, test_class_name, transform_group)

log = logging.getLogger(__name__)

ABANDONED = "abandoned"


@dataclass
class TestClassArtifact:
    focal_id: str
    test_class: str
    framework: Optional[TestClassFramework] = None
    groups: list[TestCaseGroup] = field(default_factory=list)
    methods: list[str] = field(default_factory=list)  # one per retained group, same order as method_groups
    method_groups: list[str] = field(default_factory=list)
    integrated_source: Optional[str] = None
    final_source: Optional[str] = None
    repair: Optional[RepairOutcome] = None
    status: str = ABANDONED
    abandoned_reason: Optional[str] = None
    notes: list[str] = field(default_factory=list)
    transcript: list[dict] = field(default_factory=list)
    design_prompts: list[str] = field(default_factory=list)
    coverage: Optional[tuple[tuple[int, int], tuple[int, int]]] = None
    wall_time_s: float = 0.0

    @property
    def iterations_used(self) -> int:
        return self.repair.iterations_used if self.repair else 0

    @property
    def repair_history(self) -> list[tuple[int, tuple, str]]:
        if not self.repair:
            return []
        return [(s.iteration, s.diagnostics, "+".join(s.strategies) + f": {s.summary}") for s in self.repair.history]

    @property
    def test_case_count(self) -> int:
        source = self.final_source or self.integrated_source
        if not source:
            return 0
        try:
            return len(parse_test_class(source).by_category("test"))
        except FrameworkSyntaxError:
            return 0

    def task_result(self) -> TaskResult:
        line, branch = self.coverage if self.coverage else (None, None)
        return TaskResult(self.focal_id, self.status in (PASSED, FAILING), self.status == PASSED,
                          line, branch, round(self.wall_time_s, 3), self.test_case_count)

    def summary(self) -> dict:
        return {
            "focal_id": self.focal_id,
            "test_class": self.test_class,
            "status": self.status,
            "abandoned_reason": self.abandoned_reason,
            "groups": [{"group_name": g.group_name, "intent": g.intent, "cases": len(g.cases)} for g in self.groups],
            "method_groups": self.method_groups,
            "iterations_used": self.iterations_used,
            "repair_history": [
                {"iteration": s.iteration, "strategies": list(s.strategies), "summary": s.summary, "failed": s.failed,
                 "diagnostics": [d.render() for d in s.diagnostics]}
                for s in (self.repair.history if self.repair else [])
            ],
            "notes": self.notes,
            "test_case_count": self.test_case_count,
        }


def focal_slug(focal_id: str) -> str:
    return re.sub(r"[^\w.$-]+", "_", focal_id).strip("_")


@dataclass
class PipelineContext:
    """Shared read-only state for every focal pipeline of one run."""

    config: Config
    index: FunctionIndex
    graph: CallGraph
    templates: Templates

    @classmethod
    def load(cls, config: Config) -> "PipelineContext":
        root = config.path(config.project.root)
        model = parse_project(root, config.project.include, config.project.exclude)
        for d in model.diagnostics:
            log.warning("%s: %s", d.path, d.message)
        index = build_index(model)
        templates = Templates(config.path(config.template_dir) if config.template_dir else None)
        return cls(config, index, build_call_graph(index), templates)


class GatewayFactory:
    """One gateway per focal; replay/record fixtures live in one file per focal."""

    def __init__(self, config: Config, live: Optional[Backend] = None):
        self.config = config
        self._live = live

    def live(self) -> Backend:
        if self._live is None:
            g = self.config.gateway
            self._live = LiveBackend(g.base_url, max_in_flight=g.max_in_flight, attempts=g.attempts, timeout_s=g.timeout_s)
        return self._live

    def fixture_path(self, focal_id: str) -> Path:
        return self.config.path(self.config.gateway.fixture_dir) / f"{focal_slug(focal_id)}.json"

    def __call__(self, focal_id: str) -> Gateway:
        g = self.config.gateway
        if g.backend == "replay":
            backend: Backend = ReplayBackend(ReplayFixture.load(self.fixture_path(focal_id)))
        elif g.backend == "record":
            path = self.fixture_path(focal_id)
            backend = RecordBackend(self.live(), ReplayFixture(), path)
        else:
            backend = self.live()
        return Gateway(backend, g.model, g.temperature)


def default_builder(config: Config, workdir: Path) -> Builder:
    b = config.build
    return BuildAdapter(b.compile_command, b.test_command, workdir, b.timeout_s, b.class_path,
                        placeholders={"config_dir": str(Path(config.base_dir).resolve())})


def _signatures(focal_id: str, index: FunctionIndex) -> list[str]:
    unit = index.units[focal_id]
    rec = index.classes[unit.containing_class]
    ids = [c for c in rec.constructors if c in index.units] + [focal_id] + sorted(unit.invoked_methods)
    seen, out = set(), []
    for cid in ids:
        if cid not in seen and cid in index.units:
            seen.add(cid)
            u = index.units[cid]
            owner = u.containing_class
            out.append(u.signature_text + ("" if owner == rec.qualified_name else f"  // in {owner}"))
    return out


def run_pipeline(focal_id: str, ctx: PipelineContext, gateway: Gateway, workdir: Path,
                 builder_factory: Callable[[Path], Builder]) -> TestClassArtifact:
    """Framework, design, transformation, integration, refinement; degrades instead of raising."""
    started = time.perf_counter()
    if focal_id not in ctx.index.units:
        raise UnknownFocal(focal_id)
    artifact = TestClassArtifact(focal_id, test_class_name(focal_id))
    exchanges: list[Exchange] = []
    try:
        _stages(artifact, ctx, gateway, workdir, builder_factory, exchanges)
    finally:
        head = [exchange_json(e) for e in exchanges]
        artifact.transcript = head + artifact.transcript
        artifact.wall_time_s = time.perf_counter() - started
    return artifact


def _stages(artifact: TestClassArtifact, ctx: PipelineContext, gateway: Gateway, workdir: Path,
            builder_factory: Callable[[Path], Builder], exchanges: list[Exchange]) -> None:
    cfg, index, templates = ctx.config, ctx.index, ctx.templates
    focal_id = artifact.focal_id
    unit = index.units[focal_id]
    rec = index.classes[unit.containing_class]

    traces = usage_traces(focal_id, index, ctx.graph, limit=cfg.max_usage_traces)
    root = cfg.path(cfg.project.root)
    setup = existing_test_setup(root, cfg.project.test_include, rec.simple_name)

    prompt = build_framework_prompt(focal_id, index, templates, [t.render() for t in traces], setup)
    try:
        framework = generate_framework(prompt, gateway, templates, exchanges)
    except FrameworkParseError as exc:
        artifact.abandoned_reason = "FrameworkParseError"
        artifact.notes.append(f"framework: {exc}")
        return
    artifact.framework = framework

    design = design_test_cases(focal_id, index, gateway, templates, cfg.views, exchanges)
    artifact.design_prompts = design.prompts
    artifact.notes += design.notes
    artifact.groups = design.groups
    if not design.groups:
        artifact.abandoned_reason = "NoTestCases"
        return

    usage_context = assemble_usage_context(focal_id, index, traces, cfg.related_top_n).render()
    for group in design.groups:
        result = transform_group(group, focal_id, index, usage_context, framework, gateway, templates, exchanges)
        if result.note:
            artifact.notes.append(f"transform: {result.note}")
        if result.method_text is not None:
            artifact.methods.append(result.method_text)
            artifact.method_groups.append(group.group_name)
    if not artifact.methods:
        artifact.abandoned_reason = "NoTestMethods"
        return

    integrated = integrate(framework.source_text, artifact.methods)
    artifact.notes += [f"integrate: {d.message}" for d in integrated.diagnostics]
    artifact.integrated_source = integrated.render()

    package = framework.package or rec.package
    test_file = workdir.joinpath("src", "test", "java", *(package.split(".") if package else []), f"{framework.test_class}.java")
    repair_log: list[dict] = []
    rctx = RepairContext(index, rec.package, focal_source(focal_id, index), _signatures(focal_id, index),
                         lambda **kw: templates.fill("repair.txt", **kw), repair_log)
    outcome = refine(artifact.integrated_source, test_file, builder_factory(workdir), gateway, rctx, cfg.repair_cap)
    artifact.transcript = repair_log
    artifact.repair = outcome
    artifact.final_source = outcome.final_source
    artifact.status = outcome.final_status
    if outcome.final_status != COMPILE_ERROR and cfg.build.coverage_report:
        report = Path(cfg.build.coverage_report.format(workdir=str(workdir)))
        if not report.is_absolute():
            report = workdir / report
        try:
            artifact.coverage = parse_coverage_report(report, focal_id)
        except FileNotFoundError:
            artifact.notes.append(f"coverage: no report at {report.name}")
        except MissingCoverageEntry as exc:
            artifact.notes.append(f"coverage: {exc}")


def write_artifact(artifact: TestClassArtifact, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    source = artifact.final_source or artifact.integrated_source
    if source is not None:
        (directory / f"{artifact.test_class}.java").write_text(source, encoding="utf-8")
    if artifact.integrated_source is not None:
        (directory / "integrated.java").write_text(artifact.integrated_source, encoding="utf-8")
    (directory / "ir.json").write_text(ir_dump(artifact.groups), encoding="utf-8")
    (directory / "transcript.jsonl").write_text(
        "".join(json.dumps(e, sort_keys=True, ensure_ascii=False) + "\n" for e in artifact.transcript), encoding="utf-8")
    (directory / "artifact.json").write_text(json.dumps(artifact.summary(), indent=2, ensure_ascii=False) + "\n",
                                             encoding="utf-8")
    (directory / "result.json").write_text(json.dumps(artifact.task_result().to_json(), indent=2) + "\n", encoding="utf-8")


def run_focal(focal_id: str, ctx: PipelineContext, gateways: GatewayFactory,
              builder_factory: Optional[Callable[[Path], Builder]] = None,
              out_dir: Optional[Path] = None) -> TestClassArtifact:
    """Run one focal pipeline in its own work directory and write its artifacts."""
    out = out_dir or ctx.config.path(ctx.config.output_dir)
    target = out / focal_slug(focal_id)
    workdir = target / "work"
    if workdir.exists():
        shutil.rmtree(workdir)
    workdir.mkdir(parents=True)
    factory = builder_factory or (lambda w: default_builder(ctx.config, w))
    try:
        artifact = run_pipeline(focal_id, ctx, gateways(focal_id), workdir, factory)
    except Exception as exc:  # a single focal must never take down the batch
        log.exception("pipeline for %s failed", focal_id)
        artifact = TestClassArtifact(focal_id, test_class_name(focal_id), abandoned_reason=f"InternalError: {exc}")
    write_artifact(artifact, target)
    return artifact
