"""State-only condition sets distilled from path conditions, and their file format."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

from .. import __version__
from ..callgraph import RelevanceSet
from ..subject import ir
from ..subject.errors import ConfigurationError
from ..subject.parser import parse_state_expr
from ..subject.state import UNKNOWN, ConcreteState, eval_state_path, path_type
from . import terms as T
from .canon import Atom, normalize
from .engine import DEFAULT_INLINE_DEPTH, DEFAULT_LOOP_BOUND, PathCondition, SymbolicExecutor
from .solver import Solver

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Condition:
    atom: Atom

    @property
    def canonical_form(self) -> str:
        return self.atom.text

    def paths(self) -> list[str]:
        return sorted(s.name for s in self.atom.symbols())

    def evaluate(self, state: ConcreteState) -> str:
        """'T', 'F' or 'U' on a concrete state."""

        def lookup(sym: T.Sym):
            v = eval_state_path(state, sym.name)
            if v is UNKNOWN:
                raise T.Undefined(sym.name)
            return v

        try:
            return "T" if self.atom.holds(lookup) else "F"
        except T.Undefined:
            return "U"

    def __str__(self) -> str:
        return self.atom.text


@dataclass(frozen=True)
class ConditionSet:
    conditions: tuple[Condition, ...] = ()

    def __len__(self) -> int:
        return len(self.conditions)

    def __iter__(self):
        return iter(self.conditions)

    @property
    def forms(self) -> list[str]:
        return [c.canonical_form for c in self.conditions]

    @property
    def hash(self) -> str:
        digest = hashlib.sha256("\n".join(self.forms).encode("utf-8")).hexdigest()
        return digest[:16]

    @classmethod
    def of(cls, conditions: Iterable[Condition]) -> "ConditionSet":
        unique = {c.canonical_form: c for c in conditions}
        return cls(tuple(unique[k] for k in sorted(unique)))

    def union(self, other: "ConditionSet") -> "ConditionSet":
        return ConditionSet.of(list(self.conditions) + list(other.conditions))


def is_state_only(atom: Atom) -> bool:
    return all(s.kind == T.STATE for s in atom.symbols())


def clause_atom(clause: T.Term) -> Optional[tuple[Atom, bool]]:
    r = normalize(clause)
    return None if isinstance(r, bool) else r


def extract_conditions(path_conditions: Iterable[PathCondition]) -> ConditionSet:
    """Atomic, parameter-free clauses of the path conditions; negations collapsed."""
    out = []
    for pc in path_conditions:
        for clause in pc.clauses:
            r = clause_atom(clause)
            if r is not None and is_state_only(r[0]):
                out.append(Condition(r[0]))
    return ConditionSet.of(out)


def synthesize(program: ir.SubjectProgram, relevance: RelevanceSet,
               loop_bound: int = DEFAULT_LOOP_BOUND,
               inline_depth: int = DEFAULT_INLINE_DEPTH,
               solver: Optional[Solver] = None) -> ConditionSet:
    """Union of extracted conditions over every relevant method."""
    executor = SymbolicExecutor(program, loop_bound, inline_depth, solver)
    result = ConditionSet()
    for ref in sorted(relevance.methods, key=str):
        pcs = executor.run(program.method(ref))
        result = result.union(extract_conditions(pcs))
    return result


# --- parsing conditions back from text -------------------------------------


def _to_term(e):
    if isinstance(e, ir.Lit):
        return T.Const(e.value)
    if isinstance(e, (ir.GlobalGet, ir.FieldGet)):
        return T.Sym(_path_of(e), e.type, T.STATE)
    if isinstance(e, ir.Unary):
        x = _to_term(e.operand)
        return T.neg(x) if e.op == "-" else T.not_(x)
    if isinstance(e, ir.Binary):
        a, b = _to_term(e.left), _to_term(e.right)
        if e.op in T.ARITH:
            return T.arith(e.op, a, b)
        if e.op in T.REL:
            return T.rel(e.op, a, b)
    raise ConfigurationError(f"unsupported construct in condition: {e!r}")


def _path_of(e) -> str:
    if isinstance(e, ir.GlobalGet):
        return e.qname
    return f"{_path_of(e.obj)}.{e.field}"


def parse_condition(text: str, program: ir.SubjectProgram) -> Condition:
    """Parse a canonical form; raises ConfigurationError if it is not canonical or undeclared."""
    try:
        expr = parse_state_expr(text, program)
    except Exception as exc:
        raise ConfigurationError(f"invalid condition {text!r}: {exc}") from exc
    if expr.type != ir.BOOL:
        raise ConfigurationError(f"condition {text!r} is not a predicate")
    term = _to_term(expr)
    r = clause_atom(term)
    if r is None or not r[1] or r[0].text != text:
        raise ConfigurationError(f"condition {text!r} is not in canonical form")
    for sym in r[0].symbols():
        if path_type(program, sym.name) not in ir.PRIMITIVES:
            raise ConfigurationError(f"condition {text!r} reads reference path {sym.name}")
    return Condition(r[0])


# --- file format -----------------------------------------------------------


def program_hash(program: ir.SubjectProgram) -> str:
    return hashlib.sha256(program.source.encode("utf-8")).hexdigest()[:16]


def format_conditions(cs: ConditionSet, program: Optional[ir.SubjectProgram] = None) -> str:
    lines = [
        f"# fragmon-conditions v{FORMAT_VERSION}",
        f"# program {program_hash(program) if program is not None else '-'}",
        f"# tool fragmon {__version__}",
        f"# cshash {cs.hash}",
    ]
    lines.extend(cs.forms)
    return "\n".join(lines) + "\n"


def write_conditions(cs: ConditionSet, sink: TextIO, program: Optional[ir.SubjectProgram] = None) -> int:
    sink.write(format_conditions(cs, program))
    return len(cs)


class ConditionFileError(ValueError):
    pass


@dataclass(frozen=True)
class ConditionFile:
    conditions: ConditionSet
    program_hash: str
    version: int
    tool: str


def parse_conditions(text: str, program: ir.SubjectProgram, *, check_program: bool = True) -> ConditionFile:
    header: dict[str, str] = {}
    forms = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            header[key] = value.strip()
        else:
            forms.append(line)
    fmt = header.get("fragmon-conditions")
    if fmt != f"v{FORMAT_VERSION}":
        raise ConditionFileError(f"unsupported condition file version {fmt!r}")
    declared_program = header.get("program", "-")
    if check_program and declared_program not in ("-", program_hash(program)):
        raise ConditionFileError(
            f"condition file was synthesized for program {declared_program}, "
            f"loaded program is {program_hash(program)}")
    cs = ConditionSet.of(parse_condition(f, program) for f in forms)
    if len(cs) != len(forms) or cs.forms != forms:
        raise ConditionFileError("condition file is not sorted and duplicate-free")
    declared = header.get("cshash")
    if declared is not None and declared != cs.hash:
        raise ConditionFileError(f"condition-set hash mismatch: header {declared}, content {cs.hash}")
    return ConditionFile(cs, declared_program, FORMAT_VERSION, header.get("tool", ""))


def read_conditions(source: TextIO, program: ir.SubjectProgram, **kw) -> ConditionSet:
    return parse_conditions(source.read(), program, **kw).conditions
