"""Static call graph over the knowledge index and caller discovery."""
from __future__ import annotations

from dataclasses import dataclass

from ..knowledge import FunctionIndex

ACCESSIBLE = frozenset({"public", "protected"})


@dataclass(frozen=True)
class CallGraph:
    nodes: frozenset[str]
    edges: dict[tuple[str, str], tuple[tuple[int, int], ...]]  # (caller, callee) -> call-site spans
    accessible: frozenset[str]

    def callers_of(self, callee: str) -> list[str]:
        return sorted({a for a, b in self.edges if b == callee})

    def edge_list(self) -> list[tuple[str, str]]:
        return sorted(self.edges)

    def to_dot(self) -> str:
        lines = ["digraph calls {"]
        for n in sorted(self.nodes):
            lines.append(f'  "{n}";')
        for a, b in self.edge_list():
            lines.append(f'  "{a}" -> "{b}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


class UnknownCallable(KeyError):
    pass


def build_call_graph(index: FunctionIndex) -> CallGraph:
    edges: dict[tuple[str, str], list[tuple[int, int]]] = {}
    for cid, unit in index.units.items():
        for callee, start, end in unit.call_sites:
            edges.setdefault((cid, callee), []).append((start, end))
    accessible = frozenset(cid for cid, u in index.units.items() if u.visibility in ACCESSIBLE)
    return CallGraph(
        nodes=frozenset(index.units),
        edges={k: tuple(sorted(v)) for k, v in sorted(edges.items())},
        accessible=accessible,
    )


def entry_chain(start: str, graph: CallGraph, reverse: dict[str, list[str]]) -> list[str]:
    """Shortest chain from an accessible callable down to ``start`` (inclusive).

    Breadth-first over reversed call edges, one level at a time. Among the
    accessible callables at the minimum distance the lexicographically first
    wins; parents are assigned in sorted frontier order. When no accessible
    ancestor exists the chain is just ``[start]``.
    """
    if start in graph.accessible:
        return [start]
    parent: dict[str, str] = {}
    seen = {start}
    frontier = [start]
    while frontier:
        nxt: list[str] = []
        for node in frontier:
            for pred in reverse.get(node, ()):
                if pred not in seen:
                    seen.add(pred)
                    parent[pred] = node
                    nxt.append(pred)
        nxt.sort()
        hits = [n for n in nxt if n in graph.accessible]
        if hits:
            chain = [hits[0]]
            while chain[-1] != start:
                chain.append(parent[chain[-1]])
            return chain
        frontier = nxt
    return [start]


def discover_callers(focal: str, graph: CallGraph) -> list[tuple[str, list[str]]]:
    """Direct callers of ``focal``, each with its entry chain ending at ``focal``.

    Recursive self-calls are not reported as usages of the focal method.
    """
    if focal not in graph.nodes:
        raise UnknownCallable(focal)
    reverse: dict[str, list[str]] = {}
    for a, b in graph.edges:
        reverse.setdefault(b, []).append(a)
    for preds in reverse.values():
        preds.sort()
    out = []
    for caller in graph.callers_of(focal):
        if caller == focal:
            continue
        out.append((caller, entry_chain(caller, graph, reverse) + [focal]))
    return out
