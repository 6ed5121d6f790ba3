"""Call graph, control-flow graphs and usage-trace slicing."""
from .callgraph import CallGraph, UnknownCallable, build_call_graph, discover_callers
from .cfg import CfgEdge, CfgNode, ControlFlowGraph, NoBody, build_cfg
from .slicing import UnreachableCallsite, UsageTrace, extract_usage_trace, usage_traces

__all__ = [
    "CallGraph", "CfgEdge", "CfgNode", "ControlFlowGraph", "NoBody", "UnknownCallable", "UnreachableCallsite",
    "UsageTrace", "build_call_graph", "build_cfg", "discover_callers", "extract_usage_trace", "usage_traces",
]
