"""Canonical forms for atomic predicates.

Every int comparison is rewritten to ``b < sum(c_i * t_i)`` or
``sum(c_i * t_i) == b`` where the ``t_i`` are symbols or opaque non-linear
subterms (``(e) / k``, ``(a) * (b)``), coefficients are divided by their gcd
and the leading coefficient is positive. A predicate and its negation map to
the same atom with opposite polarity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Optional, Union

from . import terms as T


@dataclass
class Lin:
    coeffs: dict[str, int]
    const: int
    atoms: dict[str, T.Term]

    def scaled(self, k: int) -> "Lin":
        if k == 0:
            return Lin({}, 0, {})
        return Lin({n: c * k for n, c in self.coeffs.items()}, self.const * k, dict(self.atoms))

    def plus(self, other: "Lin") -> "Lin":
        coeffs = dict(self.coeffs)
        for n, c in other.coeffs.items():
            v = coeffs.get(n, 0) + c
            if v:
                coeffs[n] = v
            else:
                coeffs.pop(n, None)
        atoms = {**self.atoms, **other.atoms}
        return Lin(coeffs, self.const + other.const, {n: atoms[n] for n in coeffs})

    @property
    def is_const(self) -> bool:
        return not self.coeffs


def _leading(coeffs: dict[str, int]) -> int:
    return coeffs[min(coeffs)]


def render_lin(lin: Lin) -> str:
    out = []
    for name in sorted(lin.coeffs):
        c = lin.coeffs[name]
        key = name
        if abs(c) != 1 and " / " in name:
            key = f"({name})"
        mag = abs(c)
        body = key if mag == 1 else f"{mag}*{key}"
        if not out:
            out.append(body if c > 0 else f"-{body}")
        else:
            out.append(f"+ {body}" if c > 0 else f"- {body}")
    if lin.const or not out:
        if not out:
            out.append(str(lin.const))
        else:
            out.append(f"+ {lin.const}" if lin.const > 0 else f"- {-lin.const}")
    return " ".join(out)


def linearize(t: T.Term) -> Lin:
    if isinstance(t, T.Const):
        return Lin({}, int(t.value), {})
    if isinstance(t, T.Sym):
        return Lin({t.name: 1}, 0, {t.name: t})
    op = t.op
    if op == "neg":
        return linearize(t.args[0]).scaled(-1)
    a = linearize(t.args[0])
    b = linearize(t.args[1])
    if op == "+":
        return a.plus(b)
    if op == "-":
        return a.plus(b.scaled(-1))
    if op == "*":
        if a.is_const:
            return b.scaled(a.const)
        if b.is_const:
            return a.scaled(b.const)
        ra, rb = sorted((render_lin(a), render_lin(b)))
        key = f"({ra}) * ({rb})"
        return Lin({key: 1}, 0, {key: t})
    if op == "/":
        if b.is_const and b.const != 0:
            k = b.const
            sign = 1
            if k < 0:
                k, sign = -k, -sign
            if a.is_const:
                return Lin({}, T.tdiv(a.const, k) * sign, {})
            if all(c % k == 0 for c in a.coeffs.values()) and a.const % k == 0:
                return Lin({n: c // k for n, c in a.coeffs.items()}, a.const // k, dict(a.atoms)).scaled(sign)
            if _leading(a.coeffs) < 0:
                a, sign = a.scaled(-1), -sign
            key = f"({render_lin(a)}) / {k}"
            return Lin({key: sign}, 0, {key: t})
        key = f"({render_lin(a)}) / ({render_lin(b)})"
        return Lin({key: 1}, 0, {key: t})
    raise ValueError(f"not an int term: {op}")


@dataclass(frozen=True)
class Atom:
    """Canonical atomic predicate; ``text`` is the canonical form."""

    kind: str  # "lt" (bound < sum) | "eq" (sum == bound) | "bool"
    text: str
    coeffs: tuple[tuple[str, int], ...] = ()
    bound: int = 0
    terms: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def symbols(self) -> set[T.Sym]:
        out: set[T.Sym] = set()
        for t in self.terms.values():
            out.update(T.symbols(t))
        return out

    def holds(self, lookup) -> bool:
        if self.kind == "bool":
            return bool(T.evaluate(self.terms[self.text], lookup))
        total = sum(c * T.evaluate(self.terms[n], lookup) for n, c in self.coeffs)
        return self.bound < total if self.kind == "lt" else total == self.bound

    def negated_text(self) -> str:
        if self.kind == "bool":
            return f"not {self.text}"
        if self.kind == "eq":
            return self.text.replace(" == ", " != ", 1)
        return f"{self.text.split(' < ', 1)[1]} <= {self.bound}"


def _floordiv(a: int, b: int) -> int:
    return a // b


def normalize(t: T.Term) -> Union[bool, tuple[Atom, bool]]:
    """Map a bool term to ``(atom, polarity)`` or a constant truth value."""
    polarity = True
    while isinstance(t, T.Op) and t.op == "not":
        polarity = not polarity
        t = t.args[0]
    if isinstance(t, T.Const):
        return bool(t.value) == polarity
    if isinstance(t, T.Sym):
        return Atom("bool", t.name, terms={t.name: t}), polarity
    if t.op not in T.REL:
        raise ValueError(f"not an atomic predicate: {t.op}")
    lin = linearize(t.args[0]).plus(linearize(t.args[1]).scaled(-1))
    op = t.op
    if lin.is_const:
        return T._apply(op, lin.const, 0) == polarity
    if op == ">":
        lin, op = lin.scaled(-1), "<"
    elif op == ">=":
        lin, op = lin.scaled(-1), "<="
    elif op == "!=":
        op, polarity = "==", not polarity
    if op == "<":
        lin, op = Lin(lin.coeffs, lin.const + 1, lin.atoms), "<="
    g = 0
    for c in lin.coeffs.values():
        g = gcd(g, abs(c))
    bound = -lin.const
    coeffs = dict(lin.coeffs)
    if op == "<=":
        coeffs = {n: c // g for n, c in coeffs.items()}
        bound = _floordiv(bound, g)
        if _leading(coeffs) < 0:
            coeffs = {n: -c for n, c in coeffs.items()}
            bound = -bound - 1
            polarity = not polarity
        # sum <= bound is stored as its negation, bound < sum
        text = f"{bound} < {render_lin(Lin(coeffs, 0, {}))}"
        items = tuple(sorted(coeffs.items()))
        return Atom("lt", text, items, bound, {n: lin.atoms[n] for n in coeffs}), not polarity
    else:
        if bound % g:
            return (not polarity)
        coeffs = {n: c // g for n, c in coeffs.items()}
        bound //= g
        if _leading(coeffs) < 0:
            coeffs = {n: -c for n, c in coeffs.items()}
            bound = -bound
    text = f"{render_lin(Lin(coeffs, 0, {}))} == {bound}"
    items = tuple(sorted(coeffs.items()))
    return Atom("eq", text, items, bound, {n: lin.atoms[n] for n in coeffs}), polarity


def atom_term(atom: Atom) -> T.Term:
    """Rebuild a bool term equivalent to ``atom`` (used by the solver)."""
    if atom.kind == "bool":
        return atom.terms[atom.text]
    total: Optional[T.Term] = None
    for n, c in atom.coeffs:
        piece = atom.terms[n] if c == 1 else T.arith("*", T.Const(c), atom.terms[n])
        total = piece if total is None else T.arith("+", total, piece)
    if atom.kind == "lt":
        return T.rel("<", T.Const(atom.bound), total)
    return T.rel("==", total, T.Const(atom.bound))
