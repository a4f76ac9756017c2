"""Symbolic terms over state paths, parameters and literals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Union

from ..subject.interp import tdiv

STATE = "state"
PARAM = "param"
INPUT = "input"
HAVOC = "havoc"

ARITH = ("+", "-", "*", "/")
REL = ("<", "<=", ">", ">=", "==", "!=")


@dataclass(frozen=True)
class Sym:
    name: str
    type: str  # "int" | "bool"
    kind: str = STATE


@dataclass(frozen=True, eq=False)
class Const:
    value: Union[int, bool]

    @property
    def type(self) -> str:
        return "bool" if isinstance(self.value, bool) else "int"

    # True and 1 must stay distinct constants
    def __eq__(self, other) -> bool:
        return (isinstance(other, Const) and self.value == other.value
                and isinstance(self.value, bool) == isinstance(other.value, bool))

    def __hash__(self) -> int:
        return hash((Const, isinstance(self.value, bool), self.value))


@dataclass(frozen=True, eq=False)
class Op:
    op: str  # arithmetic, relational, "neg" or "not"
    args: tuple
    type: str

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.op, self.args, self.type)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (isinstance(other, Op) and self._hash == other._hash and self.op == other.op
                and self.type == other.type and self.args == other.args)


Term = Union[Sym, Const, Op]

TRUE = Const(True)
FALSE = Const(False)


class Undefined(Exception):
    """Evaluation hit an unknown symbol value or a division by zero."""


def _apply(op: str, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise Undefined("division by zero")
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
    if op == "!=":
        return a != b
    raise ValueError(op)


def arith(op: str, a: Term, b: Term) -> Term:
    if isinstance(a, Const) and isinstance(b, Const):
        if op == "/" and b.value == 0:
            return Op(op, (a, b), "int")
        return Const(_apply(op, a.value, b.value))
    if op == "+":
        if a == Const(0):
            return b
        if b == Const(0):
            return a
    if op == "-" and b == Const(0):
        return a
    if op == "*":
        if a == Const(1):
            return b
        if b == Const(1):
            return a
        if a == Const(0) or b == Const(0):
            return Const(0)
    if op == "/" and b == Const(1):
        return a
    return Op(op, (a, b), "int")


def neg(a: Term) -> Term:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Op) and a.op == "neg":
        return a.args[0]
    return Op("neg", (a,), "int")


def rel(op: str, a: Term, b: Term) -> Term:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(_apply(op, a.value, b.value))
    return Op(op, (a, b), "bool")


def not_(a: Term) -> Term:
    if isinstance(a, Const):
        return Const(not a.value)
    if isinstance(a, Op) and a.op == "not":
        return a.args[0]
    return Op("not", (a,), "bool")


def evaluate(t: Term, lookup: Callable[[Sym], object]):
    """Concrete value of ``t``; ``lookup`` maps symbols to values (raise Undefined if absent)."""
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Sym):
        return lookup(t)
    if t.op == "neg":
        return -evaluate(t.args[0], lookup)
    if t.op == "not":
        return not evaluate(t.args[0], lookup)
    return _apply(t.op, evaluate(t.args[0], lookup), evaluate(t.args[1], lookup))


def symbols(t: Term) -> Iterator[Sym]:
    if isinstance(t, Sym):
        yield t
    elif isinstance(t, Op):
        for a in t.args:
            yield from symbols(a)


def render(t: Term) -> str:
    """Plain infix rendering (not canonical)."""
    if isinstance(t, Const):
        return str(t.value).lower() if isinstance(t.value, bool) else str(t.value)
    if isinstance(t, Sym):
        return t.name
    if t.op == "neg":
        return f"-({render(t.args[0])})"
    if t.op == "not":
        return f"not ({render(t.args[0])})"
    return f"({render(t.args[0])} {t.op} {render(t.args[1])})"
