"""ktforge command line: index, generate, related, trace, integrate, eval.

Exit codes: 0 success, 1 some task failed (abandoned artifacts), 2 fatal
configuration or I/O error. Errors go to stderr as ``error[KT###]: ...``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import Config, ConfigError, describe_keys, load_config
from .evaluation import EmptyBatch, load_results, write_report
from .frontend.model import ProjectError, parse_project
from .integrator import FrameworkSyntaxError, integrate_text
from .knowledge import build_index, save_index
from .retrieval import UnknownFocal, related_functions
from .usage import NoBody, UnknownCallable, build_call_graph, build_cfg, discover_callers, usage_traces

log = logging.getLogger("ktforge")

# stable error codes
KT_CONFIG = "KT001"
KT_IO = "KT002"
KT_FOCAL = "KT003"
KT_SYNTAX = "KT004"
KT_EVAL = "KT005"
KT_BUILD = "KT006"
KT_TASK = "KT010"


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = 2):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


class _JsonFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        entry = {"level": record.levelname.lower(), "logger": record.name, "message": record.getMessage()}
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, ensure_ascii=False)


def _setup_logging(fmt: str, verbose: int) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonFormatter() if fmt == "structured" else logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING)


def _config_epilog() -> str:
    lines = ["configuration keys (TOML; flags override the file):"]
    for key, default in describe_keys():
        lines.append(f"  {key} = {json.dumps(default)}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ktforge", description="Knowledge-guided unit test generation for Java.",
                                 epilog=_config_epilog(), formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"ktforge {__version__}")
    ap.add_argument("-c", "--config", help="TOML config file (default: ./ktforge.toml when present)")
    ap.add_argument("--log-format", choices=["text", "structured"], default="text")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="mine the knowledge base of a project")
    p.add_argument("root", nargs="?", help="project root (default: project.root)")
    p.add_argument("-o", "--output", help="index file (default: index_path)")

    p = sub.add_parser("generate", help="generate test classes")
    p.add_argument("focal", nargs="*", help="focal callable ids")
    p.add_argument("--all", action="store_true", help="every focal method listed in the config")
    p.add_argument("--backend", choices=["replay", "live", "record"])
    p.add_argument("-o", "--output-dir")
    p.add_argument("-j", "--workers", type=int)

    p = sub.add_parser("related", help="rank related functions of a focal method")
    p.add_argument("focal")
    p.add_argument("-n", type=int, help="number of results (default: related_top_n)")
    p.add_argument("--root", help="project root (default: project.root)")

    p = sub.add_parser("trace", help="export call chains and caller CFGs as DOT")
    p.add_argument("focal")
    p.add_argument("--root", help="project root (default: project.root)")
    p.add_argument("-o", "--output", help="write to a file instead of stdout")

    p = sub.add_parser("integrate", help="merge test methods into a framework class")
    p.add_argument("--framework", required=True)
    p.add_argument("--methods", nargs="+", required=True)
    p.add_argument("-o", "--output")

    p = sub.add_parser("eval", help="aggregate result.json files into metrics")
    p.add_argument("--results", required=True)
    p.add_argument("-o", "--output", required=True)
    return ap


def _load(args) -> Config:
    path = args.config
    if path is None and Path("ktforge.toml").is_file():
        path = "ktforge.toml"
    try:
        return load_config(path)
    except ConfigError as exc:
        raise CliError(KT_CONFIG, str(exc)) from exc


def _index_for(cfg: Config, root: Optional[str]):
    root_path = Path(root) if root else cfg.path(cfg.project.root)
    try:
        model = parse_project(root_path, cfg.project.include, cfg.project.exclude)
    except ProjectError as exc:
        raise CliError(KT_IO, str(exc)) from exc
    for d in model.diagnostics:
        log.warning("%s:%s: %s", d.path, d.line, d.message)
    try:
        return build_index(model)
    except ValueError as exc:
        raise CliError(KT_IO, str(exc)) from exc


def _write(text: str, output: Optional[str]) -> None:
    if output:
        try:
            Path(output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise CliError(KT_IO, f"cannot write {output}: {exc}") from exc
    else:
        sys.stdout.write(text)


def cmd_index(args, cfg: Config) -> int:
    index = _index_for(cfg, args.root)
    out = Path(args.output) if args.output else cfg.path(cfg.index_path)
    try:
        save_index(index, out)
    except OSError as exc:
        raise CliError(KT_IO, f"cannot write {out}: {exc}") from exc
    print(f"indexed {len(index.units)} callables in {len(index.classes)} classes -> {out}")
    return 0


def cmd_related(args, cfg: Config) -> int:
    index = _index_for(cfg, args.root)
    n = cfg.related_top_n if args.n is None else args.n
    try:
        ranked = related_functions(args.focal, index, n)
    except UnknownFocal as exc:
        raise CliError(KT_FOCAL, f"unknown focal method {args.focal}") from exc
    for cid, score in ranked:
        print(f"{float(score):.4f}  {cid}")
    return 0


def trace_dot(focal: str, index, graph, limit: Optional[int]) -> str:
    """Call chains of the focal's callers, then each caller's CFG with the sliced nodes filled."""
    chains = discover_callers(focal, graph)
    lines = ["digraph chains {"]
    edges = sorted({(a, b) for _, chain in chains for a, b in zip(chain, chain[1:])})
    for a, b in edges:
        lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    out = ["\n".join(lines) + "\n"]
    traces = usage_traces(focal, index, graph, limit=limit)
    for caller in sorted({t.caller for t in traces}):
        decl = index.callable(caller)
        try:
            cfg = build_cfg(decl, index.model.units[decl.source_unit].text, index.units[caller].call_sites)
        except NoBody:
            continue
        kept = {n for t in traces if t.caller == caller for n in t.retained_nodes}
        dot = cfg.to_dot().splitlines()
        for i, line in enumerate(dot):
            for n in kept:
                if line.startswith(f"  n{n} ["):
                    dot[i] = line.replace("];", ", style=filled];")
        out.append("\n".join(dot) + "\n")
    return "".join(out)


def cmd_trace(args, cfg: Config) -> int:
    index = _index_for(cfg, args.root)
    graph = build_call_graph(index)
    try:
        text = trace_dot(args.focal, index, graph, cfg.max_usage_traces)
    except UnknownCallable as exc:
        raise CliError(KT_FOCAL, f"unknown focal method {args.focal}") from exc
    _write(text, args.output)
    return 0


def cmd_integrate(args, cfg: Config) -> int:
    try:
        framework = Path(args.framework).read_text(encoding="utf-8")
        methods = [Path(m).read_text(encoding="utf-8") for m in args.methods]
    except OSError as exc:
        raise CliError(KT_IO, str(exc)) from exc
    try:
        text = integrate_text(framework, methods)
    except FrameworkSyntaxError as exc:
        raise CliError(KT_SYNTAX, f"{args.framework}: {exc}") from exc
    _write(text, args.output)
    return 0


def cmd_eval(args, cfg: Config) -> int:
    if not Path(args.results).is_dir():
        raise CliError(KT_IO, f"results directory not found: {args.results}")
    try:
        results = load_results(args.results)
        report = write_report(results, args.output)
    except EmptyBatch as exc:
        raise CliError(KT_EVAL, f"no result.json files under {args.results}") from exc
    except (OSError, KeyError, ValueError) as exc:
        raise CliError(KT_EVAL, f"cannot aggregate results: {exc}") from exc
    sys.stdout.write(report.to_csv())
    return 0


def cmd_generate(args, cfg: Config) -> int:
    from .pipeline import GatewayFactory, PipelineContext, run_focal

    if args.backend:
        cfg.gateway.backend = args.backend
    if args.output_dir:
        cfg.output_dir = str(Path(args.output_dir).resolve())
    if args.workers is not None:
        cfg.workers = args.workers
    focals = list(args.focal) + (list(cfg.focal_methods) if args.all else [])
    if not focals:
        raise CliError(KT_CONFIG, "no focal methods given (pass ids or --all with focal_methods configured)")
    if not (cfg.build.compile_command and cfg.build.test_command):
        raise CliError(KT_BUILD, "build.compile_command and build.test_command must be configured")
    try:
        ctx = PipelineContext.load(cfg)
    except (ProjectError, ValueError) as exc:
        raise CliError(KT_IO, str(exc)) from exc
    unknown = [f for f in focals if f not in ctx.index.units]
    if unknown:
        raise CliError(KT_FOCAL, f"unknown focal method {unknown[0]}")
    gateways = GatewayFactory(cfg)
    with ThreadPoolExecutor(max_workers=max(1, min(cfg.worker_count(), len(focals)))) as pool:
        artifacts = list(pool.map(lambda f: run_focal(f, ctx, gateways), focals))
    failed = 0
    for a in artifacts:
        detail = f" ({a.abandoned_reason})" if a.abandoned_reason else f", {a.iterations_used} repair iteration(s)"
        print(f"{a.status:17} {a.focal_id}{detail}")
        if a.abandoned_reason:
            failed += 1
            print(f"error[{KT_TASK}]: {a.focal_id} abandoned: {a.abandoned_reason}", file=sys.stderr)
    return 1 if failed else 0


COMMANDS = {"index": cmd_index, "generate": cmd_generate, "related": cmd_related, "trace": cmd_trace,
            "integrate": cmd_integrate, "eval": cmd_eval}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.log_format, args.verbose)
    try:
        cfg = _load(args)
        return COMMANDS[args.command](args, cfg)
    except CliError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
