"""Static call graph and bounded relevance closure around the interfaces of interest."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

from .subject import ir

DEFAULT_DEPTH = 1


@dataclass(frozen=True)
class CallEdge:
    caller: ir.MethodRef
    callee: ir.MethodRef
    site: str


@dataclass(frozen=True)
class CallGraph:
    nodes: frozenset[ir.MethodRef]
    edges: frozenset[CallEdge]
    owners: tuple[tuple[str, tuple[ir.MethodRef, ...]], ...]  # class -> its methods

    def methods_of(self, cls: str) -> tuple[ir.MethodRef, ...]:
        for name, methods in self.owners:
            if name == cls:
                return methods
        raise KeyError(cls)

    def to_dot(self) -> str:
        lines = ["digraph callgraph {"]
        for n in sorted(self.nodes, key=str):
            lines.append(f'  "{n}";')
        for e in sorted(self.edges, key=lambda e: (str(e.caller), e.site)):
            lines.append(f'  "{e.caller}" -> "{e.callee}" [label="{e.site}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RelevanceSet:
    methods: frozenset[ir.MethodRef]
    classes: frozenset[str]
    depth: int


def iter_call_sites(stmts: Iterable) -> Iterator:
    """Yield every Call/New node in syntactic (evaluation) order."""
    for st in stmts:
        if isinstance(st, ir.If):
            yield from _expr_calls(st.cond)
            yield from iter_call_sites(st.then)
            yield from iter_call_sites(st.orelse)
        elif isinstance(st, ir.While):
            yield from _expr_calls(st.cond)
            yield from iter_call_sites(st.body)
        elif isinstance(st, ir.SetField):
            yield from _expr_calls(st.obj)
            yield from _expr_calls(st.expr)
        elif getattr(st, "expr", None) is not None:
            yield from _expr_calls(st.expr)


def _expr_calls(e) -> Iterator:
    if isinstance(e, ir.Call):
        if e.receiver is not None:
            yield from _expr_calls(e.receiver)
        for a in e.args:
            yield from _expr_calls(a)
        yield e
    elif isinstance(e, ir.New):
        for a in e.args:
            yield from _expr_calls(a)
        yield e
    elif isinstance(e, ir.FieldGet):
        yield from _expr_calls(e.obj)
    elif isinstance(e, ir.Unary):
        yield from _expr_calls(e.operand)
    elif isinstance(e, ir.Binary):
        yield from _expr_calls(e.left)
        yield from _expr_calls(e.right)


def callee_of(site) -> ir.MethodRef:
    if isinstance(site, ir.New):
        return ir.MethodRef(site.cls, site.cls)
    return ir.MethodRef(site.cls, site.method)


def build_call_graph(program: ir.SubjectProgram) -> CallGraph:
    nodes = frozenset(m.ref for m in program.methods())
    edges = set()
    for m in program.methods():
        for site in iter_call_sites(m.body):
            edges.add(CallEdge(m.ref, callee_of(site), site.site))
    owners = tuple((c.name, tuple(m.ref for m in c.methods)) for c in program.classes)
    return CallGraph(nodes, frozenset(edges), owners)


def relevant_set(cg: CallGraph, interfaces: Iterable[str], depth: int = DEFAULT_DEPTH) -> RelevanceSet:
    """Methods within ``depth`` caller-or-callee hops of any interface method."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    known = {name for name, _ in cg.owners}
    seeds = set()
    for cls in interfaces:
        if cls not in known:
            raise KeyError(f"unknown interface class {cls!r}")
        seeds.update(cg.methods_of(cls))
    adjacency: dict[ir.MethodRef, set[ir.MethodRef]] = {n: set() for n in cg.nodes}
    for e in cg.edges:
        adjacency[e.caller].add(e.callee)
        adjacency[e.callee].add(e.caller)
    dist = {m: 0 for m in seeds}
    queue = deque(sorted(seeds, key=str))
    while queue:
        m = queue.popleft()
        if dist[m] == depth:
            continue
        for n in sorted(adjacency[m], key=str):
            if n not in dist:
                dist[n] = dist[m] + 1
                queue.append(n)
    methods = frozenset(dist)
    return RelevanceSet(methods, frozenset(m.cls for m in methods), depth)
