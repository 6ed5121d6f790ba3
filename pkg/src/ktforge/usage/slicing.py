"""Intra-procedural usage traces: controlling branches plus a backward data slice."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..knowledge import FunctionIndex
from .callgraph import CallGraph, discover_callers
from .cfg import ENTRY, ControlFlowGraph, NoBody, build_cfg


class UnreachableCallsite(ValueError):
    pass


@dataclass(frozen=True)
class UsageTrace:
    caller: str
    focal: str
    retained: tuple[str, ...]
    callsite_span: tuple[int, int]
    chain: tuple[str, ...]  # entry callable .. caller
    retained_nodes: tuple[int, ...] = ()
    depths: tuple[int, ...] = ()
    false_branches: tuple[int, ...] = ()  # retained branches that control via their false side

    def render(self) -> str:
        lines = []
        if len(self.chain) > 1:
            lines.append("// call chain: " + " -> ".join(self.chain + (self.focal,)))
        lines.append(f"// usage in {self.caller}")
        base = min(self.depths) if self.depths else 0
        open_depths: list[int] = []
        for i, (text, depth) in enumerate(zip(self.retained, self.depths)):
            while open_depths and depth <= open_depths[-1]:
                d = open_depths.pop()
                lines.append("    " * (d - base) + "}")
            pad = "    " * (depth - base)
            nxt = self.depths[i + 1] if i + 1 < len(self.depths) else None
            node = self.retained_nodes[i] if self.retained_nodes else None
            suffix = "  // false" if node in self.false_branches else ""
            if nxt is not None and nxt > depth:
                lines.append(f"{pad}{text} {{{suffix}")
                open_depths.append(depth)
            else:
                lines.append(f"{pad}{text}{suffix}")
        while open_depths:
            d = open_depths.pop()
            lines.append("    " * (d - base) + "}")
        return "\n".join(lines)


def _reach(adj: dict[int, list[int]], start: int, blocked: Optional[int] = None) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        for m in adj[stack.pop()]:
            if m != blocked and m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def reaching_definitions(cfg: ControlFlowGraph, adj: dict[int, list[int]]) -> dict[int, set[tuple[int, str]]]:
    """Classic forward may-analysis; returns the (def node, variable) pairs live on entry to each node."""
    preds: dict[int, list[int]] = {n: [] for n in cfg.nodes}
    for a, succ in adj.items():
        for b in succ:
            preds[b].append(a)
    rd_in: dict[int, set[tuple[int, str]]] = {n: set() for n in cfg.nodes}
    rd_out: dict[int, set[tuple[int, str]]] = {n: set() for n in cfg.nodes}
    order = sorted(cfg.nodes)
    changed = True
    while changed:
        changed = False
        for n in order:
            new_in = set().union(*(rd_out[p] for p in preds[n])) if preds[n] else set()
            defs = cfg.nodes[n].defs
            new_out = {(d, v) for d, v in new_in if v not in defs} | {(n, v) for v in defs}
            if new_in != rd_in[n] or new_out != rd_out[n]:
                rd_in[n], rd_out[n] = new_in, new_out
                changed = True
    return rd_in


def slice_nodes(cfg: ControlFlowGraph, callsite: int) -> tuple[list[int], set[int]]:
    """Retained node ids in source order, and the branches controlling via a false edge."""
    node = cfg.nodes[callsite]
    adj = cfg.adjacency(with_exceptions=node.in_catch)
    forward = _reach(adj, ENTRY)
    if callsite not in forward:
        raise UnreachableCallsite(f"node {callsite} is not reachable from entry")
    radj: dict[int, list[int]] = {n: [] for n in cfg.nodes}
    for a, succ in adj.items():
        for b in succ:
            radj[b].append(a)
    on_path = forward & _reach(radj, callsite)

    retained = {callsite}
    false_side: set[int] = set()
    for b in on_path:
        if b == callsite or cfg.nodes[b].kind != "branch":
            continue
        reaching = []
        for e in cfg.edges:
            if e.src != b or e.dst not in adj[b] or (e.label == "exception" and not node.in_catch):
                continue
            if e.dst == callsite or (e.dst != b and callsite in _reach(adj, e.dst, blocked=b)):
                reaching.append(e)
        if len({e.dst for e in reaching}) == 1 and len({e.dst for e in cfg.edges if e.src == b and e.dst in adj[b]}) >= 2:
            retained.add(b)
            if all(e.label == "false" for e in reaching):
                false_side.add(b)

    rd = reaching_definitions(cfg, adj)
    work = list(retained)
    while work:
        n = work.pop()
        for v in cfg.nodes[n].uses:
            for d, var in rd[n]:
                if var == v and d not in retained and d in on_path:
                    retained.add(d)
                    work.append(d)
    ordered = sorted(retained, key=lambda i: (cfg.nodes[i].span[0], i))
    return ordered, false_side


def extract_usage_trace(cfg: ControlFlowGraph, callsite: int, focal: str, chain: tuple[str, ...] = (),
                        callsite_span: Optional[tuple[int, int]] = None) -> UsageTrace:
    ordered, false_side = slice_nodes(cfg, callsite)
    return UsageTrace(
        caller=cfg.owner,
        focal=focal,
        retained=tuple(cfg.nodes[i].text for i in ordered),
        callsite_span=callsite_span or cfg.nodes[callsite].span,
        chain=chain or (cfg.owner,),
        retained_nodes=tuple(ordered),
        depths=tuple(cfg.nodes[i].depth for i in ordered),
        false_branches=tuple(sorted(false_side & set(ordered))),
    )


def usage_traces(focal: str, index: FunctionIndex, graph: CallGraph, limit: Optional[int] = 3) -> list[UsageTrace]:
    """One trace per call site of ``focal``, ranked by chain then retained length."""
    traces: list[UsageTrace] = []
    for caller, chain in discover_callers(focal, graph):
        decl = index.callable(caller)
        source = index.model.units[decl.source_unit].text
        try:
            cfg = build_cfg(decl, source, index.units[caller].call_sites)
        except NoBody:
            continue
        for span in graph.edges[(caller, focal)]:
            node = next((n for n in cfg.nodes.values() if focal in n.callees and n.span[0] <= span[0] and span[1] <= n.span[1]), None)
            if node is None:
                continue  # call site sits in pruned dead code
            try:
                traces.append(extract_usage_trace(cfg, node.id, focal, tuple(chain[:-1]), span))
            except UnreachableCallsite:
                continue
    traces.sort(key=lambda t: (len(t.chain), len(t.retained), t.caller, t.callsite_span))
    return traces if limit is None else traces[:limit]
