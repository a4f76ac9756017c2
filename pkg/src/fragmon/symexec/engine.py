"""Bounded symbolic execution of subject methods.

Each method is explored from a symbolic entry state: state paths reachable
from globals become ``state`` symbols named by their qualified path
(``Owner.global.field``), parameters become ``param`` symbols (``$name``),
and the receiver of an instance method is the parameter ``$self``.
Initial objects reached through distinct paths are assumed not to alias.

Loops are unrolled at most ``loop_bound`` times per loop entry; iterations
beyond the bound are cut. Callees are inlined up to ``inline_depth`` nested
calls; deeper calls havoc the state they may write.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..callgraph import build_call_graph, iter_call_sites, callee_of
from ..subject import ir
from . import terms as T
from .canon import normalize
from .solver import UNKNOWN, UNSAT, Solver

DEFAULT_LOOP_BOUND = 3
DEFAULT_INLINE_DEPTH = 2
DEFAULT_MAX_BRANCHES = 500


class _BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class SRef:
    """Symbolic object reference."""

    path: str
    kind: str  # state | param | new | havoc
    cls: str


@dataclass(frozen=True)
class PathCondition:
    path_id: int
    clauses: tuple[T.Term, ...]
    exact: bool = True  # False if some feasibility check was inconclusive
    assumptions: tuple[T.Term, ...] = ()  # input ranges; not branch decisions

    def holds(self, lookup) -> bool:
        return all(T.evaluate(c, lookup) for c in self.clauses)


class _State:
    __slots__ = ("store", "globals", "frames", "clauses", "assumptions", "havoc", "fresh", "exact",
                 "model")

    def __init__(self):
        self.store: dict = {}
        self.globals: dict = {}
        self.frames: list[dict] = [{}]
        self.clauses: tuple = ()
        self.assumptions: tuple = ()
        self.havoc: frozenset = frozenset()
        self.fresh = 0
        self.exact = True
        self.model: dict = {}  # satisfying values for the symbols in clauses

    def fork(self) -> "_State":
        s = _State.__new__(_State)
        s.store = dict(self.store)
        s.globals = dict(self.globals)
        s.frames = [dict(f) for f in self.frames]
        s.clauses = self.clauses
        s.assumptions = self.assumptions
        s.havoc = self.havoc
        s.fresh = self.fresh
        s.exact = self.exact
        s.model = self.model
        return s

    @property
    def frame(self) -> dict:
        return self.frames[-1]

    def new_name(self, prefix: str) -> str:
        self.fresh += 1
        return f"${prefix}{self.fresh}"


@dataclass
class _Out:
    state: _State
    returned: bool = False
    value: object = None


def _default(t: Optional[str]):
    if t == ir.INT:
        return T.Const(0)
    if t == ir.BOOL:
        return T.FALSE
    return None


class SymbolicExecutor:
    def __init__(self, program: ir.SubjectProgram, loop_bound: int = DEFAULT_LOOP_BOUND,
                 inline_depth: int = DEFAULT_INLINE_DEPTH, solver: Optional[Solver] = None,
                 max_branches: int = DEFAULT_MAX_BRANCHES):
        if loop_bound < 0 or inline_depth < 0 or max_branches < 1:
            raise ValueError("bounds must be non-negative")
        self.program = program
        self.loop_bound = loop_bound
        self.inline_depth = inline_depth
        self.max_branches = max_branches
        self.solver = solver or Solver()
        self._writes: dict[ir.MethodRef, tuple[frozenset, frozenset]] = {}
        self._depth = inline_depth
        self._forks = 0
        # per method: inline depth actually used, or None if abandoned
        self.effective_depth: dict[ir.MethodRef, Optional[int]] = {}

    # -- entry point --

    def run(self, method: ir.MethodDecl) -> list[PathCondition]:
        """Explore ``method``. If it needs more than ``max_branches`` branch
        decisions, retry with shallower inlining; give up (no paths) below 0."""
        depth = self.inline_depth
        while depth >= 0:
            self._depth = depth
            self._forks = 0
            try:
                pcs = self._run(method)
            except _BudgetExceeded:
                depth -= 1
                continue
            self.effective_depth[method.ref] = depth
            return pcs
        self.effective_depth[method.ref] = None
        return []

    def _run(self, method: ir.MethodDecl) -> list[PathCondition]:
        s = _State()
        for p in method.params:
            s.frame[p.name] = self._symbol(f"${p.name}", p.type, T.PARAM)
        if not method.static:
            s.frame["self"] = SRef("$self", T.PARAM, method.cls)
        outs = self.block(s, method.body, 0)
        return [PathCondition(i, o.state.clauses, o.state.exact, o.state.assumptions)
                for i, o in enumerate(outs)]

    @staticmethod
    def _symbol(name: str, t: str, kind: str):
        if t in ir.PRIMITIVES:
            return T.Sym(name, t, kind)
        return SRef(name, kind, t)

    # -- branching --

    def branch(self, s: _State, cond) -> list[tuple[_State, bool]]:
        if isinstance(cond, T.Const):
            return [(s, bool(cond.value))]
        out = []
        self._forks += 1
        if self._forks > self.max_branches:
            raise _BudgetExceeded()
        known = s.clauses + s.assumptions
        for clause, taken in ((cond, True), (T.not_(cond), False)):
            r, values = self.solver.check_extend(known, clause, s.model)
            if r == UNSAT:
                continue
            t = s.fork()
            t.clauses = s.clauses + (clause,)
            t.exact = s.exact and r != UNKNOWN
            if values:
                t.model = {**s.model, **values}
            out.append((t, taken))
        return out

    # -- statements --

    def block(self, s: _State, stmts, depth: int) -> list[_Out]:
        current = [s]
        done: list[_Out] = []
        for st in stmts:
            nxt = []
            for cur in current:
                for o in self.stmt(cur, st, depth):
                    (done if o.returned else nxt).append(o)
            current = [o.state for o in nxt]
            if not current:
                break
        return done + [_Out(c) for c in current]

    def stmt(self, s: _State, st, depth: int) -> list[_Out]:
        if isinstance(st, (ir.VarDecl, ir.SetLocal)):
            out = []
            for t, v in self.eval(s, st.expr, depth):
                t.frame[st.name] = v
                out.append(_Out(t))
            return out
        if isinstance(st, ir.SetGlobal):
            out = []
            for t, v in self.eval(s, st.expr, depth):
                t.globals[st.qname] = v
                out.append(_Out(t))
            return out
        if isinstance(st, ir.SetField):
            out = []
            for t, obj in self.eval(s, st.obj, depth):
                for u, v in self.eval(t, st.expr, depth):
                    if obj is None:
                        continue  # concrete run faults
                    u.store[(obj, st.field)] = v
                    out.append(_Out(u))
            return out
        if isinstance(st, ir.If):
            out = []
            for t, c in self.eval(s, st.cond, depth):
                for u, taken in self.branch(t, c):
                    out.extend(self.block(u, st.then if taken else st.orelse, depth))
            return out
        if isinstance(st, ir.While):
            return self._while(s, st, depth)
        if isinstance(st, ir.Eval):
            return [_Out(t) for t, _ in self.eval(s, st.expr, depth)]
        if isinstance(st, ir.Return):
            if st.expr is None:
                return [_Out(s, True, None)]
            return [_Out(t, True, v) for t, v in self.eval(s, st.expr, depth)]
        raise TypeError(st)

    def _while(self, s: _State, st: ir.While, depth: int) -> list[_Out]:
        out: list[_Out] = []
        frontier = [(s, 0)]
        while frontier:
            nxt = []
            for cur, n in frontier:
                for t, c in self.eval(cur, st.cond, depth):
                    for u, taken in self.branch(t, c):
                        if not taken:
                            out.append(_Out(u))
                        elif n < self.loop_bound:
                            for o in self.block(u, st.body, depth):
                                if o.returned:
                                    out.append(o)
                                else:
                                    nxt.append((o.state, n + 1))
            frontier = nxt
        return out

    # -- expressions --

    def eval(self, s: _State, e, depth: int) -> list[tuple[_State, object]]:
        if isinstance(e, ir.Lit):
            return [(s, None if e.value is None else T.Const(e.value))]
        if isinstance(e, ir.Var):
            return [(s, s.frame[e.name])]
        if isinstance(e, ir.SelfRef):
            return [(s, s.frame["self"])]
        if isinstance(e, ir.GlobalGet):
            v = s.globals.get(e.qname, _MISSING)
            if v is _MISSING:
                v = s.globals[e.qname] = SRef(e.qname, T.STATE, e.type)
            return [(s, v)]
        if isinstance(e, ir.FieldGet):
            out = []
            for t, obj in self.eval(s, e.obj, depth):
                if obj is None:
                    continue
                out.append((t, self.read_field(t, obj, e.field, e.type)))
            return out
        if isinstance(e, ir.Input):
            name = s.new_name("input")
            x = T.Sym(name, ir.INT, T.INPUT)
            s.assumptions += (T.rel("<=", T.Const(e.lo), x), T.rel("<=", x, T.Const(e.hi)))
            return [(s, x)]
        if isinstance(e, ir.Unary):
            f = T.neg if e.op == "-" else T.not_
            return [(t, f(v)) for t, v in self.eval(s, e.operand, depth)]
        if isinstance(e, ir.Binary):
            return self._binary(s, e, depth)
        if isinstance(e, ir.Call):
            return self._call(s, e, depth)
        if isinstance(e, ir.New):
            return self._new(s, e, depth)
        raise TypeError(e)

    def _binary(self, s: _State, e: ir.Binary, depth: int):
        out = []
        if e.op in ("and", "or"):
            for t, lv in self.eval(s, e.left, depth):
                for u, b in self.branch(t, lv):
                    if b == (e.op == "and"):
                        out.extend(self.eval(u, e.right, depth))
                    else:
                        out.append((u, T.Const(b)))
            return out
        for t, a in self.eval(s, e.left, depth):
            for u, b in self.eval(t, e.right, depth):
                if e.op == "/" and b == T.Const(0):
                    continue  # concrete run faults
                if e.op in T.ARITH:
                    out.append((u, T.arith(e.op, a, b)))
                else:
                    out.append((u, _fold(T.rel(e.op, a, b))))
        return out

    def _args(self, s: _State, args, depth: int) -> list[tuple[_State, list]]:
        acc = [(s, [])]
        for a in args:
            nxt = []
            for t, vals in acc:
                for u, v in self.eval(t, a, depth):
                    nxt.append((u, vals + [v]))
            acc = nxt
        return acc

    def _call(self, s: _State, e: ir.Call, depth: int):
        if e.receiver is None:
            recvs = [(s, None)]
        else:
            recvs = self.eval(s, e.receiver, depth)
        out = []
        ref = ir.MethodRef(e.cls, e.method)
        for t, recv in recvs:
            for u, args in self._args(t, e.args, depth):
                if e.receiver is not None and recv is None:
                    continue
                out.extend(self.invoke(u, ref, recv, args, depth + 1))
        return out

    def _new(self, s: _State, e: ir.New, depth: int):
        out = []
        decl = self.program.cls(e.cls)
        for t, args in self._args(s, e.args, depth):
            obj = SRef(t.new_name("new"), "new", e.cls)
            for fname, ftype in decl.fields:
                t.store[(obj, fname)] = _default(ftype)
            for u, _ in self.invoke(t, ir.MethodRef(e.cls, e.cls), obj, args, depth + 1):
                out.append((u, obj))
        return out

    def invoke(self, s: _State, ref: ir.MethodRef, recv, args, depth: int):
        m = self.program.method(ref)
        if depth > self._depth:
            return [self._havoc(s, m)]
        frame = {p.name: a for p, a in zip(m.params, args)}
        if recv is not None:
            frame["self"] = recv
        s.frames.append(frame)
        out = []
        for o in self.block(s, m.body, depth):
            o.state.frames.pop()
            value = o.value if o.returned else _default(m.ret)
            out.append((o.state, value))
        return out

    # -- heap --

    def read_field(self, s: _State, obj: SRef, fname: str, ftype: str):
        key = (obj, fname)
        v = s.store.get(key, _MISSING)
        if v is not _MISSING:
            return v
        if obj.kind == "havoc" or (obj.cls, fname) in s.havoc:
            v = self._fresh_havoc(s, ftype)
        elif obj.kind == "new":
            v = _default(ftype)
        else:
            v = self._symbol(f"{obj.path}.{fname}", ftype, obj.kind)
        s.store[key] = v
        return v

    def _fresh_havoc(self, s: _State, t: Optional[str]):
        if t is None:
            return None
        name = s.new_name("havoc")
        if t in ir.PRIMITIVES:
            return T.Sym(name, t, T.HAVOC)
        return SRef(name, T.HAVOC, t)

    def _havoc(self, s: _State, m: ir.MethodDecl):
        globs, fields = self.write_set(m.ref)
        for q in sorted(globs):
            s.globals[q] = self._fresh_havoc(s, self.program.global_decl(q).type)
        if fields:
            s.store = {k: v for k, v in s.store.items() if (k[0].cls, k[1]) not in fields}
            s.havoc = s.havoc | fields
        return (s, self._fresh_havoc(s, m.ret))

    def write_set(self, ref: ir.MethodRef) -> tuple[frozenset, frozenset]:
        """Globals and (class, field) pairs possibly written by ``ref`` and its callees."""
        if ref in self._writes:
            return self._writes[ref]
        cg = self.program.cache().get("callgraph")
        if cg is None:
            cg = self.program.cache()["callgraph"] = build_call_graph(self.program)
        seen = {ref}
        todo = [ref]
        globs: set[str] = set()
        fields: set[tuple[str, str]] = set()
        while todo:
            cur = todo.pop()
            m = self.program.method(cur)
            _collect_writes(m.body, globs, fields)
            for site in iter_call_sites(m.body):
                nxt = callee_of(site)
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        result = (frozenset(globs), frozenset(fields))
        self._writes[ref] = result
        return result


_MISSING = object()


def _fold(t):
    """Relations that are constant after linearization (``x != x``) become constants."""
    if isinstance(t, T.Op):
        r = normalize(t)
        if isinstance(r, bool):
            return T.Const(r)
    return t


def _collect_writes(stmts, globs: set, fields: set) -> None:
    for st in stmts:
        if isinstance(st, ir.SetGlobal):
            globs.add(st.qname)
        elif isinstance(st, ir.SetField):
            fields.add((st.cls, st.field))
        elif isinstance(st, ir.If):
            _collect_writes(st.then, globs, fields)
            _collect_writes(st.orelse, globs, fields)
        elif isinstance(st, ir.While):
            _collect_writes(st.body, globs, fields)


def symbolic_execute(program: ir.SubjectProgram, method: ir.MethodDecl | ir.MethodRef,
                     loop_bound: int = DEFAULT_LOOP_BOUND,
                     inline_depth: int = DEFAULT_INLINE_DEPTH,
                     solver: Optional[Solver] = None) -> list[PathCondition]:
    """One PathCondition per feasible path of ``method`` under the bounds."""
    if isinstance(method, ir.MethodRef):
        method = program.method(method)
    return SymbolicExecutor(program, loop_bound, inline_depth, solver).run(method)
