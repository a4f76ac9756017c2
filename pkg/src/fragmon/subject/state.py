"""Concrete program state and state-path evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import ir
from .errors import ConfigurationError


@dataclass(frozen=True)
class Ref:
    oid: int

    def __repr__(self) -> str:
        return f"@{self.oid}"


Value = Union[int, bool, None, Ref]


class _Unknown:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNKNOWN"

    def __bool__(self) -> bool:
        raise TypeError("UNKNOWN has no truth value")


UNKNOWN = _Unknown()


def default_value(t: Optional[str]) -> Value:
    if t == ir.INT:
        return 0
    if t == ir.BOOL:
        return False
    return None


@dataclass
class Obj:
    cls: str
    fields: dict[str, Value]


@dataclass
class ConcreteState:
    program: ir.SubjectProgram = field(repr=False)
    heap: dict[int, Obj] = field(default_factory=dict)
    globals: dict[str, Optional[Ref]] = field(default_factory=dict)
    next_oid: int = 1

    @classmethod
    def initial(cls, program: ir.SubjectProgram) -> "ConcreteState":
        return cls(program, {}, {g.qname: None for g in program.globals})

    def allocate(self, cls_name: str) -> Ref:
        decl = self.program.cls(cls_name)
        ref = Ref(self.next_oid)
        self.next_oid += 1
        self.heap[ref.oid] = Obj(cls_name, {n: default_value(t) for n, t in decl.fields})
        return ref

    def copy(self) -> "ConcreteState":
        heap = {oid: Obj(o.cls, dict(o.fields)) for oid, o in self.heap.items()}
        return ConcreteState(self.program, heap, dict(self.globals), self.next_oid)

    def get_field(self, ref: Ref, name: str) -> Value:
        return self.heap[ref.oid].fields[name]

    def set_field(self, ref: Ref, name: str, value: Value) -> None:
        self.heap[ref.oid].fields[name] = value


def path_type(program: ir.SubjectProgram, path: str) -> str:
    """Declared type of a fully qualified state path; raises ConfigurationError."""
    cache = program.cache().setdefault("path_types", {})
    t = cache.get(path)
    if t is None:
        t = cache[path] = _path_type(program, path)
    return t


def _path_type(program: ir.SubjectProgram, path: str) -> str:
    parts = path.split(".")
    if len(parts) < 2:
        raise ConfigurationError(f"state path {path!r} must start with Owner.global")
    g = program.global_decl(f"{parts[0]}.{parts[1]}")
    if g is None:
        raise ConfigurationError(f"state path {path!r}: no global {parts[0]}.{parts[1]}")
    t = g.type
    for fname in parts[2:]:
        if not ir.is_ref(t):
            raise ConfigurationError(f"state path {path!r}: {fname} accessed on {t}")
        ft = program.cls(t).field_type(fname)
        if ft is None:
            raise ConfigurationError(f"state path {path!r}: class {t} has no field {fname}")
        t = ft
    return t


def eval_state_path(state: ConcreteState, path: str):
    """Value at ``Owner.global.field...`` or UNKNOWN if a prefix is null."""
    path_type(state.program, path)
    parts = path.split(".")
    cur = state.globals.get(f"{parts[0]}.{parts[1]}")
    for fname in parts[2:]:
        if cur is None:
            return UNKNOWN
        cur = state.heap[cur.oid].fields[fname]
    return cur
