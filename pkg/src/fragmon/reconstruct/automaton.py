"""Interprocedural event automaton and the substring feasibility check.

Each method contributes an entry and an exit node. A call site links the
caller to the callee's entry (labelled with the event when the callee is an
event, otherwise epsilon), and the callee's exit links back by epsilon to
every return site of that callee. Call/return matching is deliberately lost,
so the language over-approximates the program's event sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..callgraph import callee_of
from ..subject import ir


class UnknownEventError(ValueError):
    pass


@dataclass
class EventAutomaton:
    labels: frozenset
    eps: list = field(default_factory=list)      # node -> [node]
    trans: list = field(default_factory=list)    # node -> {label: [node]}
    initial: int = 0
    accepting: int = 0
    method_nodes: dict = field(default_factory=dict)  # MethodRef -> (entry, exit)

    def __post_init__(self):
        self._closure: dict[int, frozenset] = {}
        self._step: dict[tuple[frozenset, str], frozenset] = {}
        self._reachable: Optional[frozenset] = None
        self._coreachable: Optional[frozenset] = None
        self._first: dict[str, frozenset] = {}

    @property
    def n_states(self) -> int:
        return len(self.eps)

    def new_node(self) -> int:
        self.eps.append([])
        self.trans.append({})
        return len(self.eps) - 1

    def add_eps(self, a: int, b: int) -> None:
        self.eps[a].append(b)

    def add(self, a: int, label: Optional[str], b: int) -> None:
        if label is None:
            self.eps[a].append(b)
        else:
            self.trans[a].setdefault(label, []).append(b)

    # -- queries --

    def closure(self, node: int) -> frozenset:
        c = self._closure.get(node)
        if c is None:
            seen = {node}
            stack = [node]
            while stack:
                v = stack.pop()
                for u in self.eps[v]:
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
            c = frozenset(seen)
            self._closure[node] = c
        return c

    def _close_set(self, nodes: Iterable[int]) -> frozenset:
        out: set[int] = set()
        for v in nodes:
            out |= self.closure(v)
        return frozenset(out)

    def step(self, states: frozenset, label: str) -> frozenset:
        key = (states, label)
        hit = self._step.get(key)
        if hit is None:
            hit = self._close_set(u for v in states for u in self.trans[v].get(label, ()))
            self._step[key] = hit
        return hit

    def reachable(self) -> frozenset:
        if self._reachable is None:
            seen = {self.initial}
            stack = [self.initial]
            while stack:
                v = stack.pop()
                succ = list(self.eps[v])
                for targets in self.trans[v].values():
                    succ.extend(targets)
                for u in succ:
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
            self._reachable = frozenset(seen)
        return self._reachable

    def coreachable(self) -> frozenset:
        if self._coreachable is None:
            pred: list[list[int]] = [[] for _ in self.eps]
            for v in range(self.n_states):
                for u in self.eps[v]:
                    pred[u].append(v)
                for targets in self.trans[v].values():
                    for u in targets:
                        pred[u].append(v)
            seen = {self.accepting}
            stack = [self.accepting]
            while stack:
                v = stack.pop()
                for u in pred[v]:
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
            self._coreachable = frozenset(seen)
        return self._coreachable

    def _check_labels(self, events: Sequence[str]) -> None:
        for e in events:
            if e not in self.labels:
                raise UnknownEventError(f"unknown event label {e!r}")

    def accepts(self, events: Sequence[str]) -> bool:
        """Whole-word acceptance from the initial state."""
        self._check_labels(events)
        cur = self.closure(self.initial)
        for e in events:
            cur = self.step(cur, e)
            if not cur:
                return False
        return self.accepting in cur

    def feasible(self, events: Sequence[str]) -> bool:
        """True iff ``events`` occurs contiguously inside some accepted word."""
        self._check_labels(events)
        if not events:
            return self.accepting in self.reachable()
        cur = self._first.get(events[0])
        if cur is None:
            live = self.reachable()
            cur = self._close_set(u for v in live for u in self.trans[v].get(events[0], ()))
            self._first[events[0]] = cur
        for e in events[1:]:
            if not cur:
                return False
            cur = self.step(cur, e)
        return bool(cur & self.coreachable())


class _Builder:
    def __init__(self, program: ir.SubjectProgram):
        self.program = program
        self.a = EventAutomaton(frozenset(program.event_labels()))

    def build(self) -> EventAutomaton:
        a = self.a
        for m in self.program.methods():
            a.method_nodes[m.ref] = (a.new_node(), a.new_node())
        for m in self.program.methods():
            entry, exit_ = a.method_nodes[m.ref]
            self._exit = exit_
            end = self.block(m.body, entry)
            a.add_eps(end, exit_)
        a.initial, a.accepting = a.method_nodes[self.program.entry]
        return a

    def block(self, stmts, cur: int) -> int:
        for st in stmts:
            cur = self.stmt(st, cur)
        return cur

    def stmt(self, st, cur: int) -> int:
        a = self.a
        if isinstance(st, ir.If):
            c = self.expr(st.cond, cur)
            join = a.new_node()
            a.add_eps(self.block(st.then, c), join)
            a.add_eps(self.block(st.orelse, c), join)
            return join
        if isinstance(st, ir.While):
            head = a.new_node()
            a.add_eps(cur, head)
            c = self.expr(st.cond, head)
            a.add_eps(self.block(st.body, c), head)
            return c
        if isinstance(st, ir.SetField):
            return self.expr(st.expr, self.expr(st.obj, cur))
        if isinstance(st, ir.Return):
            if st.expr is not None:
                cur = self.expr(st.expr, cur)
            a.add_eps(cur, self._exit)
            return a.new_node()  # unreachable continuation
        if st.expr is None:
            return cur
        return self.expr(st.expr, cur)

    def expr(self, e, cur: int) -> int:
        a = self.a
        if isinstance(e, ir.Call):
            if e.receiver is not None:
                cur = self.expr(e.receiver, cur)
            for arg in e.args:
                cur = self.expr(arg, cur)
            return self.call(e, cur)
        if isinstance(e, ir.New):
            for arg in e.args:
                cur = self.expr(arg, cur)
            return self.call(e, cur)
        if isinstance(e, ir.FieldGet):
            return self.expr(e.obj, cur)
        if isinstance(e, ir.Unary):
            return self.expr(e.operand, cur)
        if isinstance(e, ir.Binary):
            left = self.expr(e.left, cur)
            if e.op in ir.BOOL_OPS:
                join = a.new_node()
                a.add_eps(left, join)
                a.add_eps(self.expr(e.right, left), join)
                return join
            return self.expr(e.right, left)
        return cur

    def call(self, site, cur: int) -> int:
        a = self.a
        ref = callee_of(site)
        entry, exit_ = a.method_nodes[ref]
        label = ir.event_label(ref) if self.program.is_event(ref) else None
        a.add(cur, label, entry)
        ret = a.new_node()
        a.add_eps(exit_, ret)
        return ret


def build_event_automaton(program: ir.SubjectProgram) -> EventAutomaton:
    cache = program.cache()
    a = cache.get("event_automaton")
    if a is None:
        a = _Builder(program).build()
        cache["event_automaton"] = a
    return a


def cfg_feasible(automaton: EventAutomaton, events: Sequence[str]) -> bool:
    return automaton.feasible(events)
