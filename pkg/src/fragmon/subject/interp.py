"""Concrete interpreter producing ground-truth event traces."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

from . import ir
from .errors import Fault, StepBudgetExceeded
from .state import ConcreteState, Ref, Value, default_value

DEFAULT_STEP_BUDGET = 100_000


def tdiv(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


class Observer(Protocol):
    def before_event(self, index: int, label: str, state: ConcreteState) -> None: ...


@dataclass
class GroundTruthTrace:
    run_id: int
    events: tuple[str, ...]
    snapshots: tuple[ConcreteState, ...] = ()
    fault: Optional[str] = None
    final_state: Optional[ConcreteState] = field(default=None, repr=False, compare=False)

    @property
    def faulted(self) -> bool:
        return self.fault is not None


class _Return(Exception):
    def __init__(self, value: Value):
        self.value = value


class Interpreter:
    """Executes a program; one instance per run.

    ``observer.before_event`` is invoked immediately before each event on an
    interface-of-interest class, with the live state. ``on_call(caller, callee)``
    is invoked for every call if the observer defines it.
    """

    def __init__(self, program: ir.SubjectProgram, input_seed: int = 0, *,
                 observer=None, record_snapshots: bool = False,
                 step_budget: int = DEFAULT_STEP_BUDGET,
                 state: Optional[ConcreteState] = None):
        self.program = program
        self.rng = random.Random(input_seed)
        self.input_seed = input_seed
        self.state = state if state is not None else ConcreteState.initial(program)
        self.observer = observer
        self._on_call = getattr(observer, "on_call", None)
        self.record_snapshots = record_snapshots
        self.step_budget = step_budget
        self.steps = 0
        self.events: list[str] = []
        self.snapshots: list[ConcreteState] = []
        self.stack: list[ir.MethodRef] = []
        self.max_depth = 0
        self.max_loop_iterations = 0
        self._events_of = program.cache().setdefault("event_labels", {})
        self._exec = {
            ir.VarDecl: self._s_var, ir.SetLocal: self._s_local, ir.SetGlobal: self._s_global,
            ir.SetField: self._s_field, ir.If: self._s_if, ir.While: self._s_while,
            ir.Eval: self._s_eval, ir.Return: self._s_return,
        }
        self._eval = {
            ir.Lit: self._e_lit, ir.Var: self._e_var, ir.GlobalGet: self._e_global,
            ir.SelfRef: self._e_self, ir.FieldGet: self._e_field, ir.Call: self._e_call,
            ir.New: self._e_new, ir.Input: self._e_input, ir.Unary: self._e_unary,
            ir.Binary: self._e_binary,
        }

    # -- driver --

    def run(self) -> GroundTruthTrace:
        fault = None
        try:
            self.invoke(self.program.entry, None, ())
        except Fault as exc:
            fault = str(exc)
        return GroundTruthTrace(self.input_seed, tuple(self.events), tuple(self.snapshots),
                                fault, self.state)

    def invoke(self, ref: ir.MethodRef, receiver: Optional[Ref], args: Sequence[Value]) -> Value:
        m = self.program.method(ref)
        frame: dict = {p.name: a for p, a in zip(m.params, args)}
        if receiver is not None:
            frame["self"] = receiver
        self.stack.append(ref)
        self.max_depth = max(self.max_depth, len(self.stack) - 1)
        try:
            self.block(m.body, frame)
        except _Return as r:
            return r.value
        finally:
            self.stack.pop()
        return default_value(m.ret)

    def block(self, stmts, frame: dict) -> None:
        for st in stmts:
            self.steps += 1
            if self.steps > self.step_budget:
                raise StepBudgetExceeded(f"step budget {self.step_budget} exceeded", st.line)
            self._exec[type(st)](st, frame)

    def eval(self, e, frame: dict) -> Value:
        return self._eval[type(e)](e, frame)

    def _label(self, ref: ir.MethodRef) -> Optional[str]:
        try:
            return self._events_of[ref]
        except KeyError:
            label = ir.event_label(ref) if self.program.is_event(ref) else None
            self._events_of[ref] = label
            return label

    def _enter(self, ref: ir.MethodRef) -> None:
        if self._on_call is not None and self.stack:
            self._on_call(self.stack[-1], ref)
        label = self._label(ref)
        if label is None:
            return
        index = len(self.events)
        if self.observer is not None:
            self.observer.before_event(index, label, self.state)
        if self.record_snapshots:
            self.snapshots.append(self.state.copy())
        self.events.append(label)

    # -- statements --

    def _s_var(self, st: ir.VarDecl, frame):
        frame[st.name] = self.eval(st.expr, frame)

    def _s_local(self, st: ir.SetLocal, frame):
        frame[st.name] = self.eval(st.expr, frame)

    def _s_global(self, st: ir.SetGlobal, frame):
        self.state.globals[st.qname] = self.eval(st.expr, frame)

    def _s_field(self, st: ir.SetField, frame):
        obj = self.eval(st.obj, frame)
        value = self.eval(st.expr, frame)
        if obj is None:
            raise Fault(f"null dereference writing .{st.field}", st.line)
        self.state.heap[obj.oid].fields[st.field] = value

    def _s_if(self, st: ir.If, frame):
        if self.eval(st.cond, frame):
            self.block(st.then, frame)
        else:
            self.block(st.orelse, frame)

    def _s_while(self, st: ir.While, frame):
        n = 0
        while self.eval(st.cond, frame):
            n += 1
            if n > self.max_loop_iterations:
                self.max_loop_iterations = n
            self.steps += 1
            self.block(st.body, frame)

    def _s_eval(self, st: ir.Eval, frame):
        self.eval(st.expr, frame)

    def _s_return(self, st: ir.Return, frame):
        raise _Return(None if st.expr is None else self.eval(st.expr, frame))

    # -- expressions --

    def _e_lit(self, e: ir.Lit, frame):
        return e.value

    def _e_var(self, e: ir.Var, frame):
        return frame[e.name]

    def _e_global(self, e: ir.GlobalGet, frame):
        return self.state.globals[e.qname]

    def _e_self(self, e, frame):
        return frame["self"]

    def _e_field(self, e: ir.FieldGet, frame):
        obj = self.eval(e.obj, frame)
        if obj is None:
            raise Fault(f"null dereference reading .{e.field}", 0)
        return self.state.heap[obj.oid].fields[e.field]

    def _e_call(self, e: ir.Call, frame):
        receiver = None if e.receiver is None else self.eval(e.receiver, frame)
        args = [self.eval(a, frame) for a in e.args]
        if e.receiver is not None and receiver is None:
            raise Fault(f"null dereference calling {e.cls}.{e.method}")
        ref = ir.MethodRef(e.cls, e.method)
        self._enter(ref)
        return self.invoke(ref, receiver, args)

    def _e_new(self, e: ir.New, frame):
        args = [self.eval(a, frame) for a in e.args]
        ref = ir.MethodRef(e.cls, e.cls)
        self._enter(ref)
        obj = self.state.allocate(e.cls)
        self.invoke(ref, obj, args)
        return obj

    def _e_input(self, e: ir.Input, frame):
        return self.rng.randint(e.lo, e.hi)

    def _e_unary(self, e: ir.Unary, frame):
        v = self.eval(e.operand, frame)
        return -v if e.op == "-" else not v

    def _e_binary(self, e: ir.Binary, frame):
        op = e.op
        if op == "and":
            return bool(self.eval(e.left, frame)) and bool(self.eval(e.right, frame))
        if op == "or":
            return bool(self.eval(e.left, frame)) or bool(self.eval(e.right, frame))
        a = self.eval(e.left, frame)
        b = self.eval(e.right, frame)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0:
                raise Fault("division by zero")
            return tdiv(a, b)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "==":
            return a == b
        return a != b


def interpret(program: ir.SubjectProgram, input_seed: int = 0, *,
              record_snapshots: bool = False, step_budget: int = DEFAULT_STEP_BUDGET,
              observer=None) -> GroundTruthTrace:
    """Run ``program`` from its entry; deterministic for a fixed seed."""
    return Interpreter(program, input_seed, observer=observer, record_snapshots=record_snapshots,
                       step_budget=step_budget).run()
