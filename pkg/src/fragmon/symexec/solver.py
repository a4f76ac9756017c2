"""Feasibility of conjunctions of symbolic predicates.

Backed by z3. Integer division is encoded with truncation toward zero, so
linear arithmetic with constant divisors is decided exactly; anything z3
answers ``unknown`` on is reported as ``UNKNOWN`` and callers treat it as
feasible.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

import z3

from . import terms as T
from .canon import normalize

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"

TIMEOUT_MS = 2000


class Solver:
    def __init__(self, timeout_ms: int = TIMEOUT_MS):
        self.timeout_ms = timeout_ms
        self._cache: dict[frozenset, tuple] = {}
        self._vars: dict[tuple[str, str], z3.ExprRef] = {}
        self._sym_cache: dict = {}
        self._enc: dict = {}
        # one incremental solver, each query scoped by push/pop
        self._z3 = z3.Solver()
        self._z3.set("timeout", timeout_ms)
        self.calls = 0

    def _var(self, s: T.Sym):
        key = (s.name, s.type)
        v = self._vars.get(key)
        if v is None:
            v = z3.Bool(s.name) if s.type == "bool" else z3.Int(s.name)
            self._vars[key] = v
        return v

    def encode(self, t: T.Term):
        hit = self._enc.get(t)
        if hit is None:
            hit = self._enc[t] = self._encode(t)
        return hit

    def _encode(self, t: T.Term):
        if isinstance(t, T.Const):
            return z3.BoolVal(t.value) if isinstance(t.value, bool) else z3.IntVal(t.value)
        if isinstance(t, T.Sym):
            return self._var(t)
        op = t.op
        if op == "neg":
            return -self.encode(t.args[0])
        if op == "not":
            return z3.Not(self.encode(t.args[0]))
        a = self.encode(t.args[0])
        b = self.encode(t.args[1])
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return z3.If(a >= 0, a / b, -((-a) / b))
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

    def check(self, clauses: Iterable[T.Term]) -> str:
        """SAT / UNSAT / UNKNOWN for the conjunction of ``clauses``."""
        return self._solve(frozenset(clauses))[0]

    def _solve(self, key: frozenset) -> tuple[str, Optional[dict]]:
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        model = None
        if T.FALSE in key:
            result = UNSAT
        else:
            live = [c for c in key if not isinstance(c, T.Const)]
            quick = _single_linear(live[0]) if len(live) == 1 else None
            if not live:
                result = SAT
                model = {}
            elif quick is not None and quick == UNSAT:
                result = UNSAT
            else:
                self.calls += 1
                s = self._z3
                s.push()
                try:
                    for c in live:
                        s.add(self.encode(c))
                    r = s.check()
                    result = SAT if r == z3.sat else UNSAT if r == z3.unsat else UNKNOWN
                    if r == z3.sat:
                        m = s.model()
                        model = {}
                        for c in live:
                            for sym in self._syms(c):
                                v = m.eval(self._var(sym), model_completion=True)
                                model[sym] = z3.is_true(v) if sym.type == "bool" else v.as_long()
                finally:
                    s.pop()
        self._cache[key] = (result, model)
        return result, model

    def _syms(self, clause: T.Term) -> frozenset:
        hit = self._sym_cache.get(clause)
        if hit is None:
            hit = self._sym_cache[clause] = frozenset(T.symbols(clause))
        return hit

    def check_extend(self, known: Iterable[T.Term], new: T.Term,
                     model: Optional[dict] = None) -> tuple[str, Optional[dict]]:
        """Result for ``known`` plus ``new``, where ``known`` is already satisfiable.

        Only the clauses transitively sharing symbols with ``new`` matter; the
        rest is independent and satisfiable on its own. ``model`` is a
        satisfying assignment of ``known``: if it (completed with defaults)
        also satisfies the component, no solver call is needed. Returns the
        status and, when SAT, values for the component's symbols.
        """
        syms = self._syms
        rest = [(c, syms(c)) for c in known if not isinstance(c, T.Const)]
        part = [new]
        names = set(syms(new))
        grew = True
        while grew and rest:
            grew = False
            keep = []
            for c, cs in rest:
                if names.isdisjoint(cs):
                    keep.append((c, cs))
                else:
                    part.append(c)
                    names |= cs
                    grew = True
            rest = keep
        if model is not None:
            trial = {n: model.get(n, False if n.type == "bool" else 0) for n in names}
            try:
                if all(T.evaluate(c, trial.__getitem__) for c in part):
                    return SAT, trial
            except T.Undefined:
                pass
        return self._solve(frozenset(part))

    def feasible(self, clauses: Iterable[T.Term]) -> bool:
        return self.check(clauses) != UNSAT


def _single_linear(clause: T.Term) -> Optional[str]:
    """Decide a lone linear clause over plain symbols without the solver."""
    r = normalize(clause)
    if isinstance(r, bool):
        return SAT if r else UNSAT
    atom, polarity = r
    if not all(isinstance(t, T.Sym) for t in atom.terms.values()):
        return None
    if atom.kind == "bool" or atom.kind == "lt" or not polarity:
        return SAT
    g = 0
    for _, c in atom.coeffs:
        g = math.gcd(g, c)
    return SAT if g and atom.bound % g == 0 else UNSAT
