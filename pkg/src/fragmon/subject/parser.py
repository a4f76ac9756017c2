"""Parser and type checker for the subject language (see docs/grammar.md)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from . import ir
from .errors import DuplicateNameError, ParseError, ResolutionError, TypeCheckError

KEYWORDS = {
    "class", "field", "global", "method", "static", "end", "var", "if", "else",
    "while", "return", "new", "input", "true", "false", "null", "not", "and",
    "or", "interface", "entry",
}

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
                    r"|(?P<op><=|>=|==|!=|[-+*/<>=(),.:]))")


@dataclass
class Tok:
    kind: str  # num | name | op | eol
    text: str
    line: int
    col: int


def tokenize_line(text: str, lineno: int) -> list[Tok]:
    code = text.split("#", 1)[0].rstrip()
    toks: list[Tok] = []
    pos = 0
    while pos < len(code):
        if code[pos:].strip() == "":
            break
        m = _TOKEN.match(code, pos)
        if m is None or m.end() == pos:
            col = pos + len(code[pos:]) - len(code[pos:].lstrip()) + 1
            raise ParseError(f"unexpected character {code[col - 1]!r}", lineno, col)
        kind = m.lastgroup
        toks.append(Tok(kind, m.group(kind), lineno, m.start(kind) + 1))
        pos = m.end()
    toks.append(Tok("eol", "", lineno, len(code) + 1))
    return toks


# --- raw syntax ------------------------------------------------------------


@dataclass
class _Pos:
    line: int
    col: int


@dataclass
class RNum(_Pos):
    value: int


@dataclass
class RBool(_Pos):
    value: bool


@dataclass
class RNull(_Pos):
    pass


@dataclass
class RDotted(_Pos):
    parts: list[str]


@dataclass
class RCall(_Pos):
    parts: list[str]
    args: list


@dataclass
class RNew(_Pos):
    cls: str
    args: list


@dataclass
class RInput(_Pos):
    lo: int
    hi: int


@dataclass
class RUn(_Pos):
    op: str
    operand: object


@dataclass
class RBin(_Pos):
    op: str
    left: object
    right: object


RExpr = Union[RNum, RBool, RNull, RDotted, RCall, RNew, RInput, RUn, RBin]


@dataclass
class RStmt:
    kind: str  # var | assign | if | while | expr | return
    line: int
    name: str = ""
    type: str = ""
    target: Optional[RDotted] = None
    expr: Optional[object] = None
    body: list = field(default_factory=list)
    orelse: list = field(default_factory=list)


@dataclass
class RMethod:
    name: str
    params: list[tuple[str, str]]
    ret: Optional[str]
    static: bool
    body: list[RStmt]
    line: int


@dataclass
class RClass:
    name: str
    line: int
    fields: list[tuple[str, str, int]] = field(default_factory=list)
    globals: list[tuple[str, str, int]] = field(default_factory=list)
    methods: list[RMethod] = field(default_factory=list)


@dataclass
class RProgram:
    classes: list[RClass]
    interfaces: list[tuple[str, int]]
    entry: Optional[tuple[str, str, int]]


class _Stream:
    def __init__(self, toks: list[Tok]):
        self.toks = toks
        self.i = 0

    @property
    def cur(self) -> Tok:
        return self.toks[self.i]

    def next(self) -> Tok:
        t = self.toks[self.i]
        if t.kind != "eol":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.cur
        return t.kind in ("op", "name") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            t = self.cur
            got = t.text or "end of line"
            raise ParseError(f"expected {text!r}, got {got!r}", t.line, t.col)
        return self.next()

    def ident(self, what: str = "identifier") -> Tok:
        t = self.cur
        if t.kind != "name" or t.text in KEYWORDS:
            raise ParseError(f"expected {what}, got {t.text or 'end of line'!r}", t.line, t.col)
        return self.next()

    def end_of_line(self) -> None:
        t = self.cur
        if t.kind != "eol":
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col)


def _signed_int(s: _Stream) -> int:
    neg = s.accept("-")
    t = s.cur
    if t.kind != "num":
        raise ParseError("expected integer literal", t.line, t.col)
    s.next()
    return -int(t.text) if neg else int(t.text)


def parse_expr_tokens(s: _Stream) -> RExpr:
    return _or(s)


def _or(s):
    left = _and(s)
    while s.at("or"):
        t = s.next()
        left = RBin(t.line, t.col, "or", left, _and(s))
    return left


def _and(s):
    left = _not(s)
    while s.at("and"):
        t = s.next()
        left = RBin(t.line, t.col, "and", left, _not(s))
    return left


def _not(s):
    if s.at("not"):
        t = s.next()
        return RUn(t.line, t.col, "not", _not(s))
    return _cmp(s)


def _cmp(s):
    left = _add(s)
    if s.cur.kind == "op" and s.cur.text in ir.COMPARE_OPS:
        t = s.next()
        left = RBin(t.line, t.col, t.text, left, _add(s))
        if s.cur.kind == "op" and s.cur.text in ir.COMPARE_OPS:
            raise ParseError("comparisons do not chain", s.cur.line, s.cur.col)
    return left


def _add(s):
    left = _mul(s)
    while s.cur.kind == "op" and s.cur.text in ("+", "-"):
        t = s.next()
        left = RBin(t.line, t.col, t.text, left, _mul(s))
    return left


def _mul(s):
    left = _unary(s)
    while s.cur.kind == "op" and s.cur.text in ("*", "/"):
        t = s.next()
        left = RBin(t.line, t.col, t.text, left, _unary(s))
    return left


def _unary(s):
    if s.at("-"):
        t = s.next()
        return RUn(t.line, t.col, "-", _unary(s))
    return _primary(s)


def _args(s: _Stream) -> list:
    s.expect("(")
    args = []
    if not s.at(")"):
        args.append(parse_expr_tokens(s))
        while s.accept(","):
            args.append(parse_expr_tokens(s))
    s.expect(")")
    return args


def _primary(s: _Stream):
    t = s.cur
    if t.kind == "num":
        s.next()
        return RNum(t.line, t.col, int(t.text))
    if t.kind == "op" and t.text == "(":
        s.next()
        e = parse_expr_tokens(s)
        s.expect(")")
        return e
    if t.kind == "name":
        if t.text in ("true", "false"):
            s.next()
            return RBool(t.line, t.col, t.text == "true")
        if t.text == "null":
            s.next()
            return RNull(t.line, t.col)
        if t.text == "new":
            s.next()
            cls = s.ident("class name").text
            return RNew(t.line, t.col, cls, _args(s))
        if t.text == "input":
            s.next()
            s.expect("(")
            lo = _signed_int(s)
            s.expect(",")
            hi = _signed_int(s)
            s.expect(")")
            return RInput(t.line, t.col, lo, hi)
        parts = [_path_part(s)]
        while s.accept("."):
            parts.append(_path_part(s))
        if s.at("("):
            return RCall(t.line, t.col, parts, _args(s))
        return RDotted(t.line, t.col, parts)
    raise ParseError(f"unexpected {t.text or 'end of line'!r}", t.line, t.col)


def _path_part(s: _Stream) -> str:
    if s.at("self"):
        return s.next().text
    return s.ident().text


def _parse_type(s: _Stream) -> str:
    t = s.cur
    if t.kind != "name" or (t.text in KEYWORDS):
        raise ParseError("expected type", t.line, t.col)
    s.next()
    return t.text


class _Lines:
    def __init__(self, text: str):
        self.lines = []
        for i, raw in enumerate(text.splitlines(), start=1):
            toks = tokenize_line(raw, i)
            if toks[0].kind != "eol":
                self.lines.append(toks)
        self.i = 0

    def peek(self) -> Optional[list[Tok]]:
        return self.lines[self.i] if self.i < len(self.lines) else None

    def take(self) -> _Stream:
        s = _Stream(self.lines[self.i])
        self.i += 1
        return s


def _head(toks: Optional[list[Tok]]) -> str:
    return toks[0].text if toks else ""


def _parse_block(lines: _Lines, terminators: tuple[str, ...], opener: Tok) -> list[RStmt]:
    body = []
    while True:
        toks = lines.peek()
        if toks is None:
            raise ParseError("missing 'end' for block opened here", opener.line, opener.col)
        if _head(toks) in terminators and len(toks) == 2:
            return body
        body.append(_parse_stmt(lines))


def _parse_stmt(lines: _Lines) -> RStmt:
    s = lines.take()
    t = s.cur
    if s.accept("var"):
        name = s.ident("variable name").text
        s.expect(":")
        ty = _parse_type(s)
        s.expect("=")
        e = parse_expr_tokens(s)
        s.end_of_line()
        return RStmt("var", t.line, name=name, type=ty, expr=e)
    if s.accept("if"):
        cond = parse_expr_tokens(s)
        s.end_of_line()
        then = _parse_block(lines, ("else", "end"), t)
        orelse: list[RStmt] = []
        if _head(lines.peek()) == "else":
            lines.take()
            orelse = _parse_block(lines, ("end",), t)
        lines.take()
        return RStmt("if", t.line, expr=cond, body=then, orelse=orelse)
    if s.accept("while"):
        cond = parse_expr_tokens(s)
        s.end_of_line()
        body = _parse_block(lines, ("end",), t)
        lines.take()
        return RStmt("while", t.line, expr=cond, body=body)
    if s.accept("return"):
        e = None if s.cur.kind == "eol" else parse_expr_tokens(s)
        s.end_of_line()
        return RStmt("return", t.line, expr=e)
    if t.kind == "name" and t.text in KEYWORDS - {"self", "new"}:
        raise ParseError(f"unexpected keyword {t.text!r}", t.line, t.col)
    e = parse_expr_tokens(s)
    if s.at("="):
        eq = s.next()
        if not isinstance(e, RDotted):
            raise ParseError("invalid assignment target", eq.line, eq.col)
        rhs = parse_expr_tokens(s)
        s.end_of_line()
        return RStmt("assign", t.line, target=e, expr=rhs)
    s.end_of_line()
    if not isinstance(e, (RCall, RNew)):
        raise ParseError("expression statement must be a call or 'new'", t.line, t.col)
    return RStmt("expr", t.line, expr=e)


def _parse_method(lines: _Lines, s: _Stream, static: bool, head: Tok) -> RMethod:
    name = s.ident("method name").text
    s.expect("(")
    params = []
    if not s.at(")"):
        while True:
            pname = s.ident("parameter name").text
            s.expect(":")
            params.append((pname, _parse_type(s)))
            if not s.accept(","):
                break
    s.expect(")")
    ret = None
    if s.accept(":"):
        ret = _parse_type(s)
    s.end_of_line()
    body = _parse_block(lines, ("end",), head)
    lines.take()
    return RMethod(name, params, ret, static, body, head.line)


def parse_raw(text: str) -> RProgram:
    lines = _Lines(text)
    classes: list[RClass] = []
    interfaces: list[tuple[str, int]] = []
    entry = None
    while lines.peek() is not None:
        s = lines.take()
        t = s.cur
        if s.accept("class"):
            name = s.ident("class name").text
            s.end_of_line()
            cls = RClass(name, t.line)
            while True:
                toks = lines.peek()
                if toks is None:
                    raise ParseError(f"missing 'end' for class {name}", t.line, t.col)
                m = lines.take()
                mt = m.cur
                if m.accept("end"):
                    m.end_of_line()
                    break
                if m.accept("field"):
                    fname = m.ident("field name").text
                    m.expect(":")
                    cls.fields.append((fname, _parse_type(m), mt.line))
                    m.end_of_line()
                elif m.accept("global"):
                    gname = m.ident("global name").text
                    m.expect(":")
                    cls.globals.append((gname, _parse_type(m), mt.line))
                    m.end_of_line()
                elif m.accept("static"):
                    m.expect("method")
                    cls.methods.append(_parse_method(lines, m, True, mt))
                elif m.accept("method"):
                    cls.methods.append(_parse_method(lines, m, False, mt))
                elif mt.text in ("class", "interface", "entry"):
                    raise ParseError(f"missing 'end' for class {name}", t.line, t.col)
                else:
                    raise ParseError(f"unexpected {mt.text!r} in class body", mt.line, mt.col)
            classes.append(cls)
        elif s.accept("interface"):
            interfaces.append((s.ident("class name").text, t.line))
            while s.accept(","):
                interfaces.append((s.ident("class name").text, t.line))
            s.end_of_line()
        elif s.accept("entry"):
            if entry is not None:
                raise DuplicateNameError("duplicate entry declaration", t.line, t.col)
            owner = s.ident("class name").text
            s.expect(".")
            meth = s.ident("method name").text
            s.end_of_line()
            entry = (owner, meth, t.line)
        else:
            raise ParseError(f"unexpected {t.text!r} at top level", t.line, t.col)
    return RProgram(classes, interfaces, entry)


# --- type checking and resolution -----------------------------------------


@dataclass
class Scope:
    cls: Optional[str]
    static: bool = True
    allow_input: bool = False
    params: dict[str, str] = field(default_factory=dict)
    frames: list[dict[str, str]] = field(default_factory=lambda: [{}])
    declared: set[str] = field(default_factory=set)
    site_counter: list[int] = field(default_factory=lambda: [0])
    owner: str = ""

    def lookup(self, name: str) -> Optional[tuple[str, bool]]:
        if name in self.params:
            return self.params[name], True
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name], False
        return None

    def next_site(self) -> str:
        k = self.site_counter[0]
        self.site_counter[0] += 1
        return f"{self.owner}#{k}"


def _assignable(target: str, source: str) -> bool:
    return target == source or (source == ir.NULL and ir.is_ref(target))


class Checker:
    def __init__(self, raw: RProgram):
        self.raw = raw
        self.classes: dict[str, RClass] = {}
        self.fields: dict[str, dict[str, str]] = {}
        self.globals: dict[str, dict[str, str]] = {}
        self.sigs: dict[tuple[str, str], RMethod] = {}

    def check_declarations(self) -> None:
        for c in self.raw.classes:
            if c.name in self.classes:
                raise DuplicateNameError(f"duplicate class {c.name}", c.line)
            if c.name in KEYWORDS or c.name in ir.PRIMITIVES:
                raise ParseError(f"invalid class name {c.name}", c.line)
            self.classes[c.name] = c
        for c in self.raw.classes:
            fs: dict[str, str] = {}
            for fname, ftype, line in c.fields:
                if fname in fs:
                    raise DuplicateNameError(f"duplicate field {c.name}.{fname}", line)
                self._check_type(ftype, line)
                fs[fname] = ftype
            self.fields[c.name] = fs
            gs: dict[str, str] = {}
            for gname, gtype, line in c.globals:
                if gname in gs:
                    raise DuplicateNameError(f"duplicate global {c.name}.{gname}", line)
                if gtype not in self.classes:
                    raise TypeCheckError(f"global {c.name}.{gname} must have a class type", line)
                gs[gname] = gtype
            self.globals[c.name] = gs
            ctor_seen = False
            for m in c.methods:
                if (c.name, m.name) in self.sigs:
                    raise DuplicateNameError(f"duplicate method {c.name}.{m.name}", m.line)
                if m.name == c.name:
                    if m.static or m.ret is not None:
                        raise TypeCheckError(f"constructor {c.name} must be a non-static method without return type", m.line)
                    ctor_seen = True
                seen = set()
                for pname, ptype in m.params:
                    if pname in seen:
                        raise DuplicateNameError(f"duplicate parameter {pname} in {c.name}.{m.name}", m.line)
                    seen.add(pname)
                    self._check_type(ptype, m.line)
                if m.ret is not None:
                    self._check_type(m.ret, m.line)
                self.sigs[(c.name, m.name)] = m
            if not ctor_seen:
                implicit = RMethod(c.name, [], None, False, [], c.line)
                c.methods.insert(0, implicit)
                self.sigs[(c.name, c.name)] = implicit

    def _check_type(self, t: str, line: int) -> None:
        if t not in ir.PRIMITIVES and t not in self.classes:
            raise TypeCheckError(f"unknown type {t}", line)

    def check(self, source: str) -> ir.SubjectProgram:
        self.check_declarations()
        if self.raw.entry is None:
            raise ResolutionError("entry method unresolved: no entry declaration")
        owner, mname, eline = self.raw.entry
        em = self.sigs.get((owner, mname))
        if em is None:
            raise ResolutionError(f"entry method unresolved: {owner}.{mname}", eline)
        if not em.static or em.params or em.ret is not None:
            raise TypeCheckError("entry must be a static method without parameters or return type", eline)
        interfaces = set()
        for name, line in self.raw.interfaces:
            if name not in self.classes:
                raise ResolutionError(f"interface of interest {name} is not a declared class", line)
            interfaces.add(name)
        classes = []
        for c in self.raw.classes:
            methods = []
            for m in c.methods:
                is_entry = (c.name, m.name) == (owner, mname)
                methods.append(self._method(c, m, is_entry))
            classes.append(ir.ClassDecl(c.name, tuple((n, t) for n, t, _ in c.fields), tuple(methods)))
        globs = tuple(ir.GlobalDecl(c.name, g, t) for c in self.raw.classes for g, t, _ in c.globals)
        return ir.SubjectProgram(tuple(classes), globs, frozenset(interfaces),
                                 ir.MethodRef(owner, mname), source)

    def _method(self, c: RClass, m: RMethod, is_entry: bool) -> ir.MethodDecl:
        scope = Scope(c.name, static=m.static, allow_input=is_entry,
                      params=dict(m.params), owner=f"{c.name}.{m.name}")
        scope.declared = set(scope.params)
        body = self._block(m.body, scope, m)
        return ir.MethodDecl(c.name, m.name, tuple(ir.Param(n, t) for n, t in m.params),
                             m.ret, body, m.static, m.line)

    def _block(self, stmts: list[RStmt], scope: Scope, m: RMethod) -> tuple:
        scope.frames.append({})
        try:
            return tuple(self._stmt(st, scope, m) for st in stmts)
        finally:
            scope.frames.pop()

    def _stmt(self, st: RStmt, scope: Scope, m: RMethod):
        if st.kind == "var":
            if st.name in scope.declared:
                raise DuplicateNameError(f"duplicate local {st.name}", st.line)
            self._check_type(st.type, st.line)
            e = self.expr(st.expr, scope)
            if not _assignable(st.type, e.type):
                raise TypeCheckError(f"cannot initialise {st.name}: {st.type} with {e.type}", st.line)
            scope.declared.add(st.name)
            scope.frames[-1][st.name] = st.type
            return ir.VarDecl(st.name, st.type, e, st.line)
        if st.kind == "assign":
            target = st.target
            e = self.expr(st.expr, scope)
            if len(target.parts) == 1:
                name = target.parts[0]
                found = scope.lookup(name)
                if found is not None:
                    ttype, is_param = found
                    if is_param:
                        raise TypeCheckError(f"cannot assign to parameter {name}", st.line)
                    self._require_assignable(ttype, e, st.line)
                    return ir.SetLocal(name, e, st.line)
                if scope.cls is not None and name in self.globals[scope.cls]:
                    ttype = self.globals[scope.cls][name]
                    self._require_assignable(ttype, e, st.line)
                    return ir.SetGlobal(f"{scope.cls}.{name}", e, st.line)
                raise ResolutionError(f"unknown variable {name}", target.line, target.col)
            if (len(target.parts) == 2 and scope.lookup(target.parts[0]) is None
                    and target.parts[0] in self.classes and target.parts[0] != "self"
                    and not (scope.cls and target.parts[0] in self.globals[scope.cls])):
                owner, gname = target.parts
                if gname not in self.globals[owner]:
                    raise ResolutionError(f"unknown global {owner}.{gname}", target.line, target.col)
                self._require_assignable(self.globals[owner][gname], e, st.line)
                return ir.SetGlobal(f"{owner}.{gname}", e, st.line)
            obj = self.dotted(RDotted(target.line, target.col, target.parts[:-1]), scope)
            fname = target.parts[-1]
            ftype = self._field_type(obj, fname, target)
            self._require_assignable(ftype, e, st.line)
            return ir.SetField(obj, obj.type, fname, e, st.line)
        if st.kind == "if":
            cond = self._cond(st.expr, scope, st.line)
            return ir.If(cond, self._block(st.body, scope, m), self._block(st.orelse, scope, m), st.line)
        if st.kind == "while":
            cond = self._cond(st.expr, scope, st.line)
            return ir.While(cond, self._block(st.body, scope, m), st.line)
        if st.kind == "return":
            if st.expr is None:
                if m.ret is not None:
                    raise TypeCheckError(f"missing return value in {m.name}", st.line)
                return ir.Return(None, st.line)
            if m.ret is None:
                raise TypeCheckError(f"method {m.name} does not return a value", st.line)
            e = self.expr(st.expr, scope)
            self._require_assignable(m.ret, e, st.line)
            return ir.Return(e, st.line)
        e = self.expr(st.expr, scope)
        return ir.Eval(e, st.line)

    def _require_assignable(self, target: str, e, line: int) -> None:
        if not _assignable(target, e.type):
            raise TypeCheckError(f"type mismatch: expected {target}, got {e.type}", line)

    def _cond(self, raw, scope: Scope, line: int):
        e = self.expr(raw, scope)
        if e.type != ir.BOOL:
            raise TypeCheckError(f"condition must be bool, got {e.type}", line)
        return e

    def _field_type(self, obj, fname: str, where: _Pos) -> str:
        if not ir.is_ref(obj.type) or obj.type == ir.NULL:
            raise TypeCheckError(f"field access .{fname} on non-reference type {obj.type}", where.line, where.col)
        ftype = self.fields[obj.type].get(fname)
        if ftype is None:
            raise ResolutionError(f"class {obj.type} has no field {fname}", where.line, where.col)
        return ftype

    def dotted(self, d: RDotted, scope: Scope):
        parts = d.parts
        head = parts[0]
        found = scope.lookup(head)
        if head == "self":
            if scope.static or scope.cls is None:
                raise TypeCheckError("'self' used in a static context", d.line, d.col)
            cur = ir.SelfRef(scope.cls)
            rest = parts[1:]
        elif found is not None:
            cur = ir.Var(head, found[0], found[1])
            rest = parts[1:]
        elif scope.cls is not None and head in self.globals[scope.cls]:
            cur = ir.GlobalGet(f"{scope.cls}.{head}", self.globals[scope.cls][head])
            rest = parts[1:]
        elif head in self.classes and len(parts) >= 2:
            gname = parts[1]
            if gname not in self.globals[head]:
                raise ResolutionError(f"unknown global {head}.{gname}", d.line, d.col)
            cur = ir.GlobalGet(f"{head}.{gname}", self.globals[head][gname])
            rest = parts[2:]
        else:
            raise ResolutionError(f"unknown name {head}", d.line, d.col)
        for fname in rest:
            ftype = self._field_type(cur, fname, d)
            cur = ir.FieldGet(cur, cur.type, fname, ftype)
        return cur

    def _call_args(self, target: RMethod, cls: str, raw_args: list, scope: Scope, where: _Pos):
        if len(raw_args) != len(target.params):
            raise TypeCheckError(
                f"{cls}.{target.name} expects {len(target.params)} argument(s), got {len(raw_args)}",
                where.line, where.col)
        args = []
        for (pname, ptype), a in zip(target.params, raw_args):
            e = self.expr(a, scope)
            if not _assignable(ptype, e.type):
                raise TypeCheckError(f"argument {pname} of {cls}.{target.name}: expected {ptype}, got {e.type}",
                                     where.line, where.col)
            args.append(e)
        return tuple(args)

    def expr(self, e, scope: Scope):
        if isinstance(e, RNum):
            return ir.Lit(e.value, ir.INT)
        if isinstance(e, RBool):
            return ir.Lit(e.value, ir.BOOL)
        if isinstance(e, RNull):
            return ir.Lit(None, ir.NULL)
        if isinstance(e, RDotted):
            return self.dotted(e, scope)
        if isinstance(e, RInput):
            if not scope.allow_input:
                raise TypeCheckError("input() is only allowed in the entry method", e.line, e.col)
            if e.lo > e.hi:
                raise TypeCheckError("input() bounds are empty", e.line, e.col)
            return ir.Input(e.lo, e.hi)
        if isinstance(e, RNew):
            if e.cls not in self.classes:
                raise ResolutionError(f"unknown class {e.cls}", e.line, e.col)
            ctor = self.sigs[(e.cls, e.cls)]
            args = self._call_args(ctor, e.cls, e.args, scope, e)
            return ir.New(e.cls, args, e.cls, scope.next_site())
        if isinstance(e, RCall):
            return self._call(e, scope)
        if isinstance(e, RUn):
            x = self.expr(e.operand, scope)
            if e.op == "-":
                if x.type != ir.INT:
                    raise TypeCheckError(f"unary '-' needs int, got {x.type}", e.line, e.col)
                return ir.Unary("-", x, ir.INT)
            if x.type != ir.BOOL:
                raise TypeCheckError(f"'not' needs bool, got {x.type}", e.line, e.col)
            return ir.Unary("not", x, ir.BOOL)
        if isinstance(e, RBin):
            l = self.expr(e.left, scope)
            r = self.expr(e.right, scope)
            if e.op in ir.BOOL_OPS:
                want, out = ir.BOOL, ir.BOOL
            elif e.op in ir.COMPARE_OPS:
                want, out = ir.INT, ir.BOOL
            else:
                want, out = ir.INT, ir.INT
            if l.type != want or r.type != want:
                raise TypeCheckError(f"operator {e.op!r} needs {want} operands, got {l.type} and {r.type}",
                                     e.line, e.col)
            return ir.Binary(e.op, l, r, out)
        raise TypeCheckError(f"unsupported expression {e!r}")

    def _call(self, e: RCall, scope: Scope):
        name = e.parts[-1]
        prefix = e.parts[:-1]
        if not prefix:
            if scope.cls is None:
                raise ResolutionError(f"unknown method {name}", e.line, e.col)
            target = self.sigs.get((scope.cls, name))
            if target is None:
                raise ResolutionError(f"unknown method {scope.cls}.{name}", e.line, e.col)
            cls = scope.cls
            if target.static:
                receiver = None
            else:
                if scope.static:
                    raise TypeCheckError(f"instance method {cls}.{name} called from a static context",
                                         e.line, e.col)
                receiver = ir.SelfRef(cls)
        elif (len(prefix) == 1 and prefix[0] in self.classes and scope.lookup(prefix[0]) is None
              and not (scope.cls and prefix[0] in self.globals[scope.cls])):
            cls = prefix[0]
            target = self.sigs.get((cls, name))
            if target is None:
                raise ResolutionError(f"unknown method {cls}.{name}", e.line, e.col)
            if not target.static:
                raise TypeCheckError(f"instance method {cls}.{name} called without receiver", e.line, e.col)
            receiver = None
        else:
            receiver = self.dotted(RDotted(e.line, e.col, prefix), scope)
            if not ir.is_ref(receiver.type) or receiver.type == ir.NULL:
                raise TypeCheckError(f"call .{name} on non-reference type {receiver.type}", e.line, e.col)
            cls = receiver.type
            target = self.sigs.get((cls, name))
            if target is None:
                raise ResolutionError(f"unknown method {cls}.{name}", e.line, e.col)
            if target.static:
                raise TypeCheckError(f"static method {cls}.{name} called on an instance", e.line, e.col)
        if name == cls:
            raise TypeCheckError(f"constructor {cls} can only be invoked with 'new'", e.line, e.col)
        args = self._call_args(target, cls, e.args, scope, e)
        return ir.Call(cls, name, receiver, args, target.ret, scope.next_site())


def parse_program(text: str) -> ir.SubjectProgram:
    """Parse and type-check subject-language source text."""
    raw = parse_raw(text)
    return Checker(raw).check(text)


def parse_state_expr(text: str, program: ir.SubjectProgram):
    """Parse an expression over fully qualified state paths (``Owner.global.field``).

    Used for conditions read back from condition files; locals, parameters,
    calls and ``input()`` are rejected.
    """
    s = _Stream(tokenize_line(text, 1))
    raw_expr = parse_expr_tokens(s)
    s.end_of_line()
    checker = _checker_for(program)
    return checker.expr(_reject_calls(raw_expr), Scope(cls=None))


def _reject_calls(e):
    if isinstance(e, (RCall, RNew, RInput)):
        raise ParseError("calls are not allowed in state expressions", e.line, e.col)
    if isinstance(e, RUn):
        _reject_calls(e.operand)
    elif isinstance(e, RBin):
        _reject_calls(e.left)
        _reject_calls(e.right)
    return e


def _checker_for(program: ir.SubjectProgram) -> Checker:
    c = Checker(RProgram([], [], None))
    for cls in program.classes:
        c.classes[cls.name] = RClass(cls.name, 0)
        c.fields[cls.name] = dict(cls.fields)
        c.globals[cls.name] = {}
    for g in program.globals:
        c.globals[g.owner][g.name] = g.type
    return c
