"""Random subject programs for the evaluation corpus.

Programs are emitted as source text and parsed back, so everything the
generator produces goes through the same checks as hand-written programs.
Termination is by construction: service methods only call methods with a
higher index, and every loop runs on a bounded counter.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field
from typing import Optional

from ..subject import ir
from ..subject.parser import parse_program

LITERALS = (0, 1, 2, 3, 5, 7, 10, 100, 5000)
DIVISORS = (2, 3)
CMP = ("<", "<=", ">", ">=", "==", "!=")


@dataclass(frozen=True)
class GeneratorParams:
    rng_seed: int = 0
    n_classes: int = 4
    n_methods_per_class: int = 3
    max_branch_depth: int = 2
    max_loop_nesting: int = 1
    min_fields: int = 1
    max_fields: int = 3
    n_interfaces: int = 1
    max_statements: int = 3
    main_iterations: int = 3
    allow_faults: bool = False

    def __post_init__(self):
        for name in ("n_classes", "n_methods_per_class", "min_fields", "max_fields",
                     "n_interfaces", "max_statements", "main_iterations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.max_branch_depth < 0 or self.max_loop_nesting < 0:
            raise ValueError("nesting bounds must be non-negative")
        if self.min_fields > self.max_fields:
            raise ValueError("min_fields exceeds max_fields")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class _Data:
    name: str
    fields: list  # (name, type)
    ops: list = field(default_factory=list)  # (name, param count)

    def int_fields(self):
        return [f for f, t in self.fields if t == ir.INT]

    def bool_fields(self):
        return [f for f, t in self.fields if t == ir.BOOL]


@dataclass
class _Service:
    name: str
    methods: list = field(default_factory=list)  # (name, n_params, returns_int)


class _Emitter:
    def __init__(self):
        self.lines: list[str] = []
        self.indent = 0

    def line(self, text: str = "") -> None:
        self.lines.append("  " * self.indent + text if text else "")

    def open(self, text: str) -> None:
        self.line(text)
        self.indent += 1

    def close(self) -> None:
        self.indent -= 1
        self.line("end")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


class _Gen:
    def __init__(self, params: GeneratorParams):
        self.p = params
        self.rng = random.Random(params.rng_seed)
        self.out = _Emitter()
        n = params.n_classes
        self.single = n == 1
        n_data = 1 if n <= 2 else max(1, n // 2)
        self.data = []
        for i in range(n_data):
            k = self.rng.randint(params.min_fields, params.max_fields)
            fields = [(f"f{j}", ir.INT) for j in range(k)]
            if k > 1 and self.rng.random() < 0.5:
                fields[-1] = (fields[-1][0], ir.BOOL)
            self.data.append(_Data("C0" if self.single else f"D{i}", fields))
        self.services = [_Service("C0")] if self.single else [_Service(f"S{i}") for i in range(max(1, n - n_data))]
        self.owner = self.services[0].name
        # globals: at least one per data class, g0 always of the first interface class
        self.globals = [(f"g{i}", d.name) for i, d in enumerate(self.data)]
        if not self.single and self.rng.random() < 0.5:
            self.globals.append((f"g{len(self.globals)}", self.rng.choice(self.data).name))
        self.fresh = 0
        for d in self.data:
            if not self.single:
                n_ops = max(0, params.n_methods_per_class - 2)
                d.ops = [(f"op{j}", self.rng.randint(0, 1)) for j in range(n_ops)]
        # service method signatures; method 0 of service 0 anchors the condition set
        order = []
        for s in self.services:
            count = params.n_methods_per_class
            for j in range(count):
                s.methods.append((f"m{j}", self.rng.randint(0, 2) if (s, j) != (self.services[0], 0) else 0,
                                  self.rng.random() < 0.3))
                order.append((s.name, j))
        self.order = order  # global call order: a method may call only later ones

    # -- helpers --

    def new_local(self, prefix: str = "t") -> str:
        self.fresh += 1
        return f"{prefix}{self.fresh}"

    def data_of(self, cls: str) -> _Data:
        return next(d for d in self.data if d.name == cls)

    def gref(self, g: str, here: str) -> str:
        return g if here == self.owner else f"{self.owner}.{g}"

    def int_atom(self, env, here: str) -> str:
        r = self.rng.random()
        ints = env["ints"]
        if ints and r < 0.4:
            return self.rng.choice(ints)
        if r < 0.7:
            g, cls = self.rng.choice(self.globals)
            d = self.data_of(cls)
            fs = d.int_fields()
            if fs:
                f = self.rng.choice(fs)
                if self.single or self.rng.random() < 0.7:
                    return f"{self.gref(g, here)}.get{f.upper()}()"
                return f"{self.gref(g, here)}.{f}"
        return str(self.rng.choice(LITERALS))

    def int_expr(self, env, here: str, depth: int = 0) -> str:
        r = self.rng.random()
        if depth >= 2 or r < 0.45:
            return self.int_atom(env, here)
        a = self.int_expr(env, here, depth + 1)
        if r < 0.7:
            return f"{a} + {self.int_expr(env, here, depth + 1)}"
        if r < 0.85:
            return f"{a} - {self.int_atom(env, here)}"
        if r < 0.93:
            return f"({a}) / {self.rng.choice(DIVISORS)}"
        return f"({a}) * {self.rng.choice((2, 3))}"

    def cond(self, env, here: str, depth: int = 0) -> str:
        r = self.rng.random()
        if depth == 0 and r < 0.15:
            op = self.rng.choice(("and", "or"))
            return f"{self.cond(env, here, 1)} {op} {self.cond(env, here, 1)}"
        if env["bools"] and r < 0.25:
            b = self.rng.choice(env["bools"])
            return b if self.rng.random() < 0.5 else f"not {b}"
        return f"{self.int_expr(env, here, 1)} {self.rng.choice(CMP)} {self.int_atom(env, here)}"

    # -- emission --

    def emit(self) -> str:
        o = self.out
        o.line(f"# generated: seed {self.p.rng_seed}")
        for d in self.data:
            o.line()
            self.emit_data(d)
        for s in self.services:
            if self.single:
                break
            o.line()
            self.emit_service(s)
        o.line()
        n_if = min(self.p.n_interfaces, len(self.data))
        o.line("interface " + ", ".join(d.name for d in self.data[:n_if]))
        o.line(f"entry {self.owner}.main")
        return o.text()

    def emit_data(self, d: _Data) -> None:
        o = self.out
        o.open(f"class {d.name}")
        for f, t in d.fields:
            o.line(f"field {f}: {t}")
        if self.single:
            for g, cls in self.globals:
                o.line(f"global {g}: {cls}")
        params = ", ".join(f"a{k}: {t}" for k, (_, t) in enumerate(d.fields))
        o.open(f"method {d.name}({params})")
        for k, (f, _) in enumerate(d.fields):
            o.line(f"self.{f} = a{k}")
        o.close()
        for f, t in d.fields:
            o.open(f"method get{f.upper()}(): {t}")
            o.line(f"return self.{f}")
            o.close()
        for f in d.int_fields():
            o.open(f"method set{f.upper()}(v: int)")
            o.line(f"self.{f} = v")
            o.close()
        for name, n_params in d.ops:
            self.emit_op(d, name, n_params)
        if self.single:
            self.emit_service_methods(self.services[0])
        o.close()

    def emit_op(self, d: _Data, name: str, n_params: int) -> None:
        o = self.out
        ints = d.int_fields()
        params = ", ".join(f"x{k}: int" for k in range(n_params))
        o.open(f"method {name}({params}): int")
        pool = [f"x{k}" for k in range(n_params)] + [f"self.{f}" for f in ints]
        lhs = self.rng.choice(pool) if pool else "0"
        rhs = self.rng.choice(pool + [str(self.rng.choice(LITERALS))])
        if self.p.max_branch_depth > 0:
            o.open(f"if {lhs} {self.rng.choice(CMP)} {rhs}")
            if ints and self.rng.random() < 0.6:
                f = self.rng.choice(ints)
                o.line(f"self.{f} = self.{f} + {self.rng.choice((1, 2, 5))}")
            o.line(f"return {lhs} + 1")
            o.close()
        o.line(f"return {self.rng.choice(pool) if pool else '0'}")
        o.close()

    def emit_service(self, s: _Service) -> None:
        o = self.out
        o.open(f"class {s.name}")
        if s.name == self.owner:
            for g, cls in self.globals:
                o.line(f"global {g}: {cls}")
        self.emit_service_methods(s)
        o.close()

    def emit_service_methods(self, s: _Service) -> None:
        for j, (name, n_params, returns) in enumerate(s.methods):
            self.emit_method(s, j, name, n_params, returns)
        if s.name == self.owner:
            self.emit_main()

    def emit_method(self, s: _Service, j: int, name: str, n_params: int, returns: bool) -> None:
        o = self.out
        params = ", ".join(f"p{k}: int" for k in range(n_params))
        ret = ": int" if returns else ""
        o.open(f"static method {name}({params}){ret}")
        env = {"ints": [f"p{k}" for k in range(n_params)], "bools": []}
        here = s.name
        if (s.name, j) == (self.owner, 0) and self.p.max_branch_depth > 0:
            g, cls = self.globals[0]
            d = self.data_of(cls)
            f = d.int_fields()[0] if d.int_fields() else d.fields[0][0]
            t = self.new_local()
            o.line(f"var {t}: int = {self.gref(g, here)}.get{f.upper()}()")
            env["ints"].append(t)
            o.open(f"if {t} > {self.rng.choice((3, 10, 100, 5000))}")
            self.block(env, here, (s.name, j), 1, 0, 2)
            o.indent -= 1
            o.line("else")
            o.indent += 1
            self.block(env, here, (s.name, j), 1, 0, 1)
            o.close()
        self.block(env, here, (s.name, j), 0, 0, self.p.max_statements)
        if returns:
            o.line(f"return {self.int_expr(env, here)}")
        o.close()

    def block(self, env, here: str, me, branch_depth: int, loop_depth: int, budget: int) -> None:
        o = self.out
        scope = {"ints": list(env["ints"]), "bools": list(env["bools"])}
        n = self.rng.randint(1, max(1, budget))
        for _ in range(n):
            r = self.rng.random()
            if r < 0.2 and branch_depth < self.p.max_branch_depth:
                o.open(f"if {self.cond(scope, here)}")
                self.block(scope, here, me, branch_depth + 1, loop_depth, max(1, budget - 1))
                if self.rng.random() < 0.5:
                    o.indent -= 1
                    o.line("else")
                    o.indent += 1
                    self.block(scope, here, me, branch_depth + 1, loop_depth, max(1, budget - 1))
                o.close()
            elif r < 0.3 and loop_depth < self.p.max_loop_nesting:
                c = self.new_local("i")
                o.line(f"var {c}: int = 0")
                guard = f"{c} < {self.rng.randint(1, 3)}"
                if self.rng.random() < 0.4:
                    guard += f" and {self.cond(scope, here, 1)}"
                o.open(f"while {guard}")
                self.block(scope, here, me, branch_depth, loop_depth + 1, max(1, budget - 1))
                o.line(f"{c} = {c} + 1")
                o.close()
            elif r < 0.5:
                t = self.new_local()
                o.line(f"var {t}: int = {self.int_expr(scope, here)}")
                scope["ints"].append(t)
            elif r < 0.65:
                g, cls = self.rng.choice(self.globals)
                d = self.data_of(cls)
                if d.int_fields():
                    f = self.rng.choice(d.int_fields())
                    o.line(f"{self.gref(g, here)}.set{f.upper()}({self.int_expr(scope, here)})")
            elif r < 0.75:
                g, cls = self.rng.choice(self.globals)
                d = self.data_of(cls)
                if d.ops:
                    name, k = self.rng.choice(d.ops)
                    args = ", ".join(self.int_expr(scope, here, 1) for _ in range(k))
                    t = self.new_local()
                    o.line(f"var {t}: int = {self.gref(g, here)}.{name}({args})")
                    scope["ints"].append(t)
            elif r < 0.78 and self.p.allow_faults and not self.single:
                g, _ = self.rng.choice(self.globals[1:] or self.globals)
                o.line(f"{self.gref(g, here)} = null")
            else:
                self.call_later(scope, here, me)

    def call_later(self, scope, here: str, me) -> None:
        idx = self.order.index(me)
        later = self.order[idx + 1:]
        if not later:
            return
        sname, j = self.rng.choice(later)
        svc = next(s for s in self.services if s.name == sname)
        name, k, returns = svc.methods[j]
        args = ", ".join(self.int_expr(scope, here, 1) for _ in range(k))
        target = name if sname == here else f"{sname}.{name}"
        if returns and self.rng.random() < 0.5:
            t = self.new_local()
            self.out.line(f"var {t}: int = {target}({args})")
            scope["ints"].append(t)
        else:
            self.out.line(f"{target}({args})")

    def emit_main(self) -> None:
        o = self.out
        o.open("static method main()")
        for g, cls in self.globals:
            d = self.data_of(cls)
            args = ", ".join("input(-5, 5005)" if t == ir.INT else "input(0, 1) == 1" for _, t in d.fields)
            o.line(f"{g} = new {cls}({args})")
        o.line("var i: int = 0")
        o.line(f"var n: int = input(1, {self.p.main_iterations})")
        o.open("while i < n")
        entries = [(self.services[0], 0)]
        others = [(s, j) for s in self.services for j in range(len(s.methods)) if (s, j) != entries[0]]
        if others:
            entries.append(self.rng.choice(others))
        for s, j in entries:
            name, k, _ = s.methods[j]
            args = ", ".join("input(-5, 5005)" for _ in range(k))
            target = name if s.name == self.owner else f"{s.name}.{name}"
            o.line(f"{target}({args})")
        o.line("i = i + 1")
        o.close()
        o.close()


def generate_source(params: GeneratorParams) -> str:
    return _Gen(params).emit()


def generate_subject(params: Optional[GeneratorParams] = None, **overrides) -> ir.SubjectProgram:
    """Deterministic per ``params.rng_seed``; the result always type-checks."""
    if params is None:
        params = GeneratorParams(**overrides)
    elif overrides:
        params = GeneratorParams(**{**params.to_dict(), **overrides})
    return parse_program(generate_source(params))
