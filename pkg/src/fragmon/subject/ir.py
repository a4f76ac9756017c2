"""Resolved, type-checked representation of subject programs.

Types are plain strings: ``"int"``, ``"bool"``, ``"null"`` or a class name.
A method without a return type has ``ret = None``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

INT = "int"
BOOL = "bool"
NULL = "null"
PRIMITIVES = (INT, BOOL)


def is_ref(t: Optional[str]) -> bool:
    return t is not None and t not in PRIMITIVES


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: Union[int, bool, None]
    type: str


@dataclass(frozen=True)
class Var:
    """Local variable or parameter read."""

    name: str
    type: str
    is_param: bool = False


@dataclass(frozen=True)
class GlobalGet:
    qname: str  # "Owner.name"
    type: str


@dataclass(frozen=True)
class SelfRef:
    type: str


@dataclass(frozen=True)
class FieldGet:
    obj: "Expr"
    cls: str
    field: str
    type: str


@dataclass(frozen=True)
class Call:
    cls: str
    method: str
    receiver: Optional["Expr"]  # None for static calls
    args: tuple["Expr", ...]
    type: Optional[str]
    site: str


@dataclass(frozen=True)
class New:
    cls: str
    args: tuple["Expr", ...]
    type: str
    site: str


@dataclass(frozen=True)
class Input:
    lo: int
    hi: int
    type: str = INT


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "not"
    operand: "Expr"
    type: str


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    type: str


Expr = Union[Lit, Var, GlobalGet, SelfRef, FieldGet, Call, New, Input, Unary, Binary]

ARITH_OPS = ("+", "-", "*", "/")
COMPARE_OPS = ("<", "<=", ">", ">=", "==", "!=")
BOOL_OPS = ("and", "or")


# --- statements ------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str
    expr: Expr
    line: int


@dataclass(frozen=True)
class SetLocal:
    name: str
    expr: Expr
    line: int


@dataclass(frozen=True)
class SetGlobal:
    qname: str
    expr: Expr
    line: int


@dataclass(frozen=True)
class SetField:
    obj: Expr
    cls: str
    field: str
    expr: Expr
    line: int


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...]
    line: int


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]
    line: int


@dataclass(frozen=True)
class Eval:
    expr: Expr  # Call or New
    line: int


@dataclass(frozen=True)
class Return:
    expr: Optional[Expr]
    line: int


Stmt = Union[VarDecl, SetLocal, SetGlobal, SetField, If, While, Eval, Return]


# --- declarations ----------------------------------------------------------


@dataclass(frozen=True)
class MethodRef:
    cls: str
    name: str

    def __str__(self) -> str:
        return f"{self.cls}.{self.name}"

    @classmethod
    def parse(cls, text: str) -> "MethodRef":
        owner, _, name = text.partition(".")
        if not owner or not name:
            raise ValueError(f"malformed method reference {text!r}")
        return cls(owner, name)


@dataclass(frozen=True)
class Param:
    name: str
    type: str


@dataclass(frozen=True)
class MethodDecl:
    cls: str
    name: str
    params: tuple[Param, ...]
    ret: Optional[str]
    body: tuple[Stmt, ...]
    static: bool = False
    line: int = 0

    @property
    def ref(self) -> MethodRef:
        return MethodRef(self.cls, self.name)

    @property
    def is_ctor(self) -> bool:
        return self.name == self.cls


@dataclass(frozen=True)
class GlobalDecl:
    owner: str
    name: str
    type: str

    @property
    def qname(self) -> str:
        return f"{self.owner}.{self.name}"


@dataclass(frozen=True)
class ClassDecl:
    name: str
    fields: tuple[tuple[str, str], ...]
    methods: tuple[MethodDecl, ...]

    def field_type(self, name: str) -> Optional[str]:
        for fname, ftype in self.fields:
            if fname == name:
                return ftype
        return None

    def method(self, name: str) -> Optional[MethodDecl]:
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass(frozen=True)
class SubjectProgram:
    classes: tuple[ClassDecl, ...]
    globals: tuple[GlobalDecl, ...]
    interfaces_of_interest: frozenset[str]
    entry: MethodRef
    source: str = field(default="", compare=False, repr=False)

    def cache(self) -> dict:
        """Per-instance scratch space for derived lookups (not part of equality)."""
        c = self.__dict__.get("_cache")
        if c is None:
            c = {}
            object.__setattr__(self, "_cache", c)
        return c

    def _index(self) -> tuple[dict, dict]:
        c = self.cache()
        if "index" not in c:
            c["index"] = ({k.name: k for k in self.classes},
                          {m.ref: m for k in self.classes for m in k.methods})
        return c["index"]

    def cls(self, name: str) -> ClassDecl:
        return self._index()[0][name]

    def has_class(self, name: str) -> bool:
        return name in self._index()[0]

    def method(self, ref: MethodRef) -> MethodDecl:
        return self._index()[1][ref]

    def methods(self) -> list[MethodDecl]:
        return [m for c in self.classes for m in c.methods]

    def global_decl(self, qname: str) -> Optional[GlobalDecl]:
        for g in self.globals:
            if g.qname == qname:
                return g
        return None

    def is_event(self, ref: MethodRef) -> bool:
        return ref.cls in self.interfaces_of_interest

    def event_labels(self) -> list[str]:
        labels = []
        for c in self.classes:
            if c.name in self.interfaces_of_interest:
                labels.extend(event_label(m.ref) for m in c.methods)
        return labels


def event_label(ref: MethodRef) -> str:
    """``Class()`` for constructors, ``Class.method`` otherwise."""
    if ref.name == ref.cls:
        return f"{ref.cls}()"
    return f"{ref.cls}.{ref.name}"
