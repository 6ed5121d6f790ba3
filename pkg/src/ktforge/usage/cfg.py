"""Statement-level control-flow graphs for callable bodies."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..frontend import syntax as js
from ..frontend.exprs import TokenView, analyze
from ..frontend.model import CallableDecl, collapse_ws

ENTRY, EXIT = 0, 1


class NoBody(ValueError):
    """The callable is abstract or an interface method."""


@dataclass(frozen=True)
class CfgNode:
    id: int
    kind: str  # entry | exit | statement | branch | call
    text: str
    span: tuple[int, int]
    defs: frozenset[str] = frozenset()
    uses: frozenset[str] = frozenset()
    callees: tuple[str, ...] = ()
    depth: int = 0
    in_catch: bool = False
    construct: str = ""  # if | while | do | for | foreach | case | try, for branch nodes


@dataclass(frozen=True)
class CfgEdge:
    src: int
    dst: int
    label: Optional[str] = None  # true | false | case(k) | exception


@dataclass(frozen=True)
class ControlFlowGraph:
    owner: str
    nodes: dict[int, CfgNode]
    edges: tuple[CfgEdge, ...]

    def successors(self, n: int, with_exceptions: bool = True) -> list[tuple[int, Optional[str]]]:
        return [(e.dst, e.label) for e in self.edges if e.src == n and (with_exceptions or e.label != "exception")]

    def adjacency(self, with_exceptions: bool = True) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n: [] for n in self.nodes}
        for e in self.edges:
            if with_exceptions or e.label != "exception":
                adj[e.src].append(e.dst)
        return adj

    def to_dot(self) -> str:
        lines = [f'digraph "{_dot_escape(self.owner)}" {{']
        for n in sorted(self.nodes.values(), key=lambda n: n.id):
            shape = {"branch": "diamond", "entry": "oval", "exit": "oval", "call": "box3d"}.get(n.kind, "box")
            lines.append(f'  n{n.id} [shape={shape}, label="{_dot_escape(n.text)}"];')
        for e in self.edges:
            attr = f' [label="{_dot_escape(e.label)}"]' if e.label else ""
            lines.append(f"  n{e.src} -> n{e.dst}{attr};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


Preds = list[tuple[int, Optional[str]]]


@dataclass
class _Loop:
    label: Optional[str]
    continue_to: Optional[int]  # None for switch
    breaks: Preds = field(default_factory=list)
    continues: Preds = field(default_factory=list)


class _Builder:
    def __init__(self, decl: CallableDecl, source: str, call_sites: Iterable[tuple[str, int, int]]):
        self.decl = decl
        self.source = source
        self.sites = sorted(call_sites, key=lambda s: (s[1], s[2], s[0]))
        self.nodes: dict[int, CfgNode] = {}
        self.edges: list[CfgEdge] = []
        self.loops: list[_Loop] = []
        self.handlers: list[list[int]] = []  # catch-head node ids of enclosing try blocks
        self.locals: set[str] = {name for name, _ in decl.parameters}
        self.depth = 0
        self.in_catch = False
        self.pending_label: Optional[str] = None
        self.view: Optional[TokenView] = None

    # -- graph primitives ----------------------------------------------------

    def node(self, kind: str, text: str, span: tuple[int, int], exprs: Iterable[js.Expr] = (),
             defs: Iterable[str] = (), uses: Iterable[str] = (), construct: str = "") -> int:
        all_defs, all_uses = set(defs), set(uses)
        for e in exprs:
            d, u = self.facts(e)
            all_defs |= d
            all_uses |= u
        callees = tuple(dict.fromkeys(c for c, s, t in self.sites if s >= span[0] and t <= span[1]))
        if kind == "statement" and callees:
            kind = "call"
        nid = len(self.nodes)
        self.nodes[nid] = CfgNode(nid, kind, collapse_ws(text), span, frozenset(all_defs), frozenset(all_uses),
                                  callees, self.depth, self.in_catch, construct)
        return nid

    def connect(self, preds: Preds, dst: int) -> None:
        for src, label in preds:
            self.edges.append(CfgEdge(src, dst, label))

    def facts(self, e: js.Expr) -> tuple[set[str], set[str]]:
        f = analyze(self.view, e.lo, e.hi)
        defs = {name for name, _ in f.assigned}
        uses = f.read_names()
        for name, _ in f.declared:
            defs.add(name)
            self.locals.add(name)
        for call in f.calls:
            # a method invoked on a local may mutate it
            if call.receiver and call.receiver[0].kind == "name" and call.receiver[0].text in self.locals:
                defs.add(call.receiver[0].text)
                uses.add(call.receiver[0].text)
        return defs, uses

    def src(self, start: int, end: int) -> str:
        return self.source[start:end]

    # -- statements ----------------------------------------------------------

    def seq(self, stmts: list[js.Stmt], preds: Preds) -> Preds:
        for s in stmts:
            preds = self.stmt(s, preds)
        return preds

    def simple(self, s: js.Stmt, preds: Preds, exprs: Iterable[js.Expr] = (), defs: Iterable[str] = ()) -> int:
        n = self.node("statement", self.src(s.start, s.end), (s.start, s.end), exprs, defs)
        self.connect(preds, n)
        return n

    def stmt(self, s: js.Stmt, preds: Preds) -> Preds:
        label, self.pending_label = self.pending_label, None
        if isinstance(s, js.Block):
            self.depth += 1
            out = self.seq(s.stmts, preds)
            self.depth -= 1
            return out
        if isinstance(s, js.LocalVar):
            names = [d.name for d in s.declarators]
            n = self.simple(s, preds, [d.init for d in s.declarators if d.init is not None], names)
            self.locals.update(names)
            return [(n, None)]
        if isinstance(s, js.ExprStmt):
            return [(self.simple(s, preds, [s.expr]), None)]
        if isinstance(s, js.If):
            b = self.node("branch", f"if ({self.src(s.cond.start, s.cond.end)})", (s.cond.start, s.cond.end),
                          [s.cond], construct="if")
            self.connect(preds, b)
            out = self.nested(s.then, [(b, "true")])
            if s.orelse is not None:
                out += self.nested(s.orelse, [(b, "false")])
            else:
                out.append((b, "false"))
            return out
        if isinstance(s, js.While):
            b = self.node("branch", f"while ({self.src(s.cond.start, s.cond.end)})", (s.cond.start, s.cond.end),
                          [s.cond], construct="while")
            self.connect(preds, b)
            return self.loop(b, s.body, [(b, "true")], label, b)
        if isinstance(s, js.DoWhile):
            first = len(self.nodes)
            loop = _Loop(label, -1)  # continues are wired to the condition below
            self.loops.append(loop)
            ends = self.nested(s.body, preds)
            self.loops.pop()
            b = self.node("branch", f"while ({self.src(s.cond.start, s.cond.end)})", (s.cond.start, s.cond.end),
                          [s.cond], construct="do")
            self.connect(ends + loop.continues, b)
            self.edges.append(CfgEdge(b, first if first < b else b, "true"))
            return [(b, "false")] + loop.breaks
        if isinstance(s, js.For):
            for init in s.init:
                preds = self.stmt(init, preds)
            b = self.node("branch", self.src(s.start, s.header_end),
                          (s.cond.start, s.cond.end) if s.cond is not None else (s.start, s.header_end),
                          [s.cond] if s.cond is not None else [], construct="for")
            self.connect(preds, b)
            loop = _Loop(label, b)
            self.loops.append(loop)
            ends = self.nested(s.body, [(b, "true")])
            self.loops.pop()
            ends += loop.continues
            if s.update:
                start, end = s.update[0].start, s.update[-1].end
                u = self.node("statement", self.src(start, end), (start, end), s.update)
                self.connect(ends, u)
                ends = [(u, None)]
            self.connect(ends, b)
            return [(b, "false")] + loop.breaks
        if isinstance(s, js.ForEach):
            b = self.node("branch", self.src(s.start, s.header_end), (s.start, s.header_end), [s.iterable],
                          defs=[s.var_name], construct="foreach")
            self.locals.add(s.var_name)
            self.connect(preds, b)
            return self.loop(b, s.body, [(b, "true")], label, b)
        if isinstance(s, js.Switch):
            return self.switch(s, preds, label)
        if isinstance(s, (js.Return, js.Throw)):
            n = self.simple(s, preds, [s.value] if s.value is not None else [])
            if isinstance(s, js.Throw) and self.handlers:
                for h in self.handlers[-1]:
                    self.edges.append(CfgEdge(n, h, "exception"))
            else:
                self.edges.append(CfgEdge(n, EXIT))
            return []
        if isinstance(s, js.Jump):
            n = self.simple(s, preds)
            target = self.jump_target(s)
            if target is None:
                return [(n, None)]  # stray jump: fall through
            (target.breaks if s.keyword == "break" else target.continues).append((n, None))
            return []
        if isinstance(s, js.Try):
            return self.try_stmt(s, preds)
        if isinstance(s, js.Synchronized):
            n = self.node("statement", f"synchronized ({self.src(s.lock.start, s.lock.end)})", (s.lock.start, s.lock.end), [s.lock])
            self.connect(preds, n)
            return self.nested(s.block, [(n, None)])
        if isinstance(s, js.Labeled):
            self.pending_label = s.label
            if isinstance(s.body, (js.While, js.DoWhile, js.For, js.ForEach, js.Switch)):
                return self.stmt(s.body, preds)
            self.pending_label = None
            loop = _Loop(s.label, None)
            self.loops.append(loop)
            out = self.stmt(s.body, preds)
            self.loops.pop()
            return out + loop.breaks
        if isinstance(s, js.Opaque):
            return [(self.simple(s, preds, [s.expr] if s.expr is not None else []), None)]
        raise TypeError(f"unhandled statement {type(s).__name__}")

    def nested(self, s: js.Stmt, preds: Preds) -> Preds:
        if isinstance(s, js.Block):
            return self.stmt(s, preds)
        self.depth += 1
        out = self.stmt(s, preds)
        self.depth -= 1
        return out

    def loop(self, head: int, body: js.Stmt, preds: Preds, label: Optional[str], cont: int) -> Preds:
        loop = _Loop(label, cont)
        self.loops.append(loop)
        ends = self.nested(body, preds)
        self.loops.pop()
        self.connect(ends + loop.continues, cont)
        return [(head, "false")] + loop.breaks

    def jump_target(self, s: js.Jump) -> Optional[_Loop]:
        for loop in reversed(self.loops):
            if s.label is not None:
                if loop.label == s.label:
                    return loop
            elif s.keyword == "break" or loop.continue_to is not None:
                return loop
        return None

    def switch(self, s: js.Switch, preds: Preds, label: Optional[str]) -> Preds:
        selector = self.src(s.selector.start, s.selector.end)
        sel_defs, sel_uses = self.facts(s.selector)
        loop = _Loop(label, None)
        self.loops.append(loop)
        cases = [c for c in s.cases if c.labels] + [c for c in s.cases if not c.labels]
        pending = preds  # flow into the next case test
        fall: Preds = []
        out: Preds = []
        for case in cases:
            if case.labels:
                labels = [collapse_ws(self.src(l.start, l.end)) for l in case.labels]
                text = " || ".join(f"{selector} == {l}" for l in labels)
                b = self.node("branch", text, (case.start, case.labels[-1].end), defs=sel_defs, uses=sel_uses, construct="case")
                self.connect(pending, b)
                body_preds = [(b, f"case({', '.join(labels)})")] + fall
                pending = [(b, "false")]
            else:
                body_preds = pending + fall
                pending = []
            self.depth += 1
            ends = self.seq(case.body, body_preds)
            self.depth -= 1
            if case.arrow:
                out += ends
                fall = []
            else:
                fall = ends
        self.loops.pop()
        return out + fall + pending + loop.breaks

    def try_stmt(self, s: js.Try, preds: Preds) -> Preds:
        if not s.catches:
            ends = self.seq(s.resources, preds)
            ends = self.nested(s.block, ends)
            return self.nested(s.final, ends) if s.final is not None else ends
        head = self.node("branch", "try", (s.start, s.start + 3), construct="try")
        self.connect(preds, head)
        catch_heads = []
        saved_catch = self.in_catch
        self.in_catch = True
        for c in s.catches:
            catch_heads.append(self.node("statement", self.src(c.start, c.header_end), (c.start, c.header_end), defs=[c.name]))
        self.in_catch = saved_catch
        for h in catch_heads:
            self.edges.append(CfgEdge(head, h, "exception"))
        self.handlers.append(catch_heads)
        ends = self.seq(s.resources, [(head, None)])
        ends = self.nested(s.block, ends)
        self.handlers.pop()
        self.in_catch = True
        for c, h in zip(s.catches, catch_heads):
            self.locals.add(c.name)
            ends += self.nested(c.block, [(h, None)])
        self.in_catch = saved_catch
        return self.nested(s.final, ends) if s.final is not None else ends


def build_cfg(decl: CallableDecl, source: str, call_sites: Iterable[tuple[str, int, int]] = ()) -> ControlFlowGraph:
    """CFG of ``decl``'s body; ``call_sites`` are resolved (callee, start, end) triples."""
    if decl.body_span is None:
        raise NoBody(f"{decl.id} has no body")
    block, tokens = js.parse_block(source, decl.body_span)
    b = _Builder(decl, source, call_sites)
    b.view = TokenView(tokens)
    b.node("entry", "entry", (decl.body_span[0], decl.body_span[0]))
    b.node("exit", "exit", (decl.body_span[1], decl.body_span[1]))
    b.depth = -1  # the body block brings it to 0
    ends = b.stmt(block, [(ENTRY, None)])
    b.connect(ends, EXIT)
    return _prune(ControlFlowGraph(decl.id, b.nodes, tuple(b.edges)))


def _prune(cfg: ControlFlowGraph) -> ControlFlowGraph:
    """Drop nodes unreachable from entry (dead code) and duplicate edges."""
    adj = cfg.adjacency()
    seen = {ENTRY}
    stack = [ENTRY]
    while stack:
        for m in adj[stack.pop()]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    seen.add(EXIT)
    edges = tuple(dict.fromkeys(e for e in cfg.edges if e.src in seen and e.dst in seen))
    nodes = {i: n for i, n in cfg.nodes.items() if i in seen}
    return ControlFlowGraph(cfg.owner, nodes, edges)
