"""Randomised properties of the small building blocks."""

import io
import itertools
import random

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fragmon.monitor import Fragment, FragmentMeta, FragmentSet, Length, RecordingPolicy
from fragmon.monitor import read_fragments, write_fragments
from fragmon.reconstruct import can_concat, enumerate_chains
from fragmon.subject import tdiv
from fragmon.symexec import terms as T
from fragmon.symexec.canon import normalize

X = T.Sym("G.a.x", "int", T.STATE)
Y = T.Sym("G.a.y", "int", T.STATE)

small = st.integers(-6, 6)
ops = st.sampled_from(["<", "<=", ">", ">=", "==", "!="])


def lin_term(a, b, c):
    return T.arith("+", T.arith("+", T.arith("*", T.Const(a), X), T.arith("*", T.Const(b), Y)), T.Const(c))


@st.composite
def relations(draw):
    lhs = lin_term(draw(small), draw(small), draw(small))
    rhs = lin_term(draw(small), draw(small), draw(small))
    return T.rel(draw(ops), lhs, rhs)


def truth(norm, lookup):
    if isinstance(norm, bool):
        return norm
    atom, pol = norm
    return atom.holds(lookup) == pol


@given(relations(), st.integers(-50, 50), st.integers(-50, 50))
def test_normalize_preserves_meaning(t, x, y):
    lookup = {X: x, Y: y}.__getitem__
    assert truth(normalize(t), lookup) == T.evaluate(t, lookup)


@given(relations())
def test_negation_shares_atom(t):
    n, m = normalize(t), normalize(T.not_(t))
    if isinstance(n, bool):
        assert m is (not n)
    else:
        assert n[0].text == m[0].text and n[1] != m[1]


@given(relations(), st.integers(2, 5))
def test_scaling_invariant(t, k):
    assume(not isinstance(t, T.Const))
    lhs, rhs = t.args
    scaled = T.rel(t.op, T.arith("*", T.Const(k), lhs), T.arith("*", T.Const(k), rhs))
    a, b = normalize(t), normalize(scaled)
    assert (a == b) if isinstance(a, bool) else (a[0].text, a[1]) == (b[0].text, b[1])


@given(st.integers(-10**6, 10**6), st.integers(-1000, 1000).filter(bool))
def test_tdiv(a, b):
    q = tdiv(a, b)
    r = a - q * b
    assert abs(r) < abs(b)
    assert r == 0 or (r > 0) == (a > 0)


signature = st.lists(st.sampled_from("TFU"), min_size=3, max_size=3).map("".join)
label = st.sampled_from(["A()", "A.f", "A.g", "B.h"])


@st.composite
def fragment_sets(draw):
    frags, index = [], 0
    for run in range(draw(st.integers(0, 3))):
        index = 0
        for _ in range(draw(st.integers(0, 3))):
            events = tuple(draw(st.lists(label, min_size=1, max_size=4)))
            index += draw(st.integers(0, 3))
            frags.append(Fragment(draw(signature), events, draw(signature),
                                  FragmentMeta(run, draw(st.sampled_from(["a", "b"])), index,
                                               index + len(events) - 1)))
            index += len(events)
    return FragmentSet(tuple(frags), "cafe")


@given(fragment_sets(), st.booleans())
def test_fragment_file_round_trip(fs, production):
    buf = io.StringIO()
    write_fragments(fs, buf, production=production)
    buf.seek(0)
    back = read_fragments(buf)
    assert [(f.start, f.events, f.end) for f in back] == [(f.start, f.events, f.end) for f in fs]
    if not production:
        assert back.fragments == fs.fragments
    # an empty file carries no hash
    assert back.cshash == (fs.cshash if len(fs) else "")


tiny_sig = st.sampled_from(["TT", "TF", "FU"])


@settings(max_examples=60)
@given(st.lists(st.tuples(tiny_sig, tiny_sig), min_size=1, max_size=4), st.integers(1, 4))
def test_chains_match_brute_force(pairs, max_len):
    frags = [Fragment(a, ("e",), b) for a, b in pairs]
    got = enumerate_chains(frags, max_len, max_outputs=10**6)
    want = {c for k in range(1, max_len + 1) for c in itertools.product(range(len(frags)), repeat=k)
            if all(can_concat(frags[i], frags[j]) for i, j in zip(c, c[1:]))}
    assert len(got) == len(set(got)) and set(got) == want


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 1000))
def test_fixed_windows_periodic(on, off, seed):
    run = RecordingPolicy("windowed", Length("fixed", on), Length("fixed", off), budget=1.0).start(seed)
    recorded, got = 0, []
    for i in range(3 * (on + off)):
        d = run.decide(i, recorded)
        recorded += d
        got.append(d)
    assert got == [(i % (on + off)) < on for i in range(len(got))]


@given(st.floats(0.05, 1.0), st.integers(0, 1000))
def test_budget_bounds_window_starts(budget, seed):
    pol = RecordingPolicy("windowed", Length("fixed", 3), Length("fixed", 1), budget=budget)
    run = pol.start(seed)
    recorded, prev = 0, False
    for i in range(200):
        d = run.decide(i, recorded)
        if d and not prev and i:
            # a new window opens only while under budget
            assert recorded <= budget * i
        recorded += d
        prev = d


@given(st.integers(0, 2**31))
def test_geometric_length_positive(seed):
    rng = random.Random(seed)
    assert Length("geometric", 5.0).draw(rng) >= 1
