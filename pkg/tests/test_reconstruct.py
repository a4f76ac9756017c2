import io
import itertools

import pytest

from fragmon.monitor import ConditionSetMismatch, Fragment, FragmentSet
from fragmon.reconstruct import (UnknownEventError, build_event_automaton, can_concat, cfg_feasible,
                                 concatenate, enumerate_chains, read_traces, reconstruct,
                                 write_traces)
from fragmon.subject import interpret, parse_program

# the three fragments of the worked Vehicle example, 4-entry signatures
F1 = Fragment("UUFT", ("Vehicle()", "Vehicle.setWeight", "Vehicle.setVelocity", "Vehicle()"), "TTFT")
F2 = Fragment("TTFT", ("Vehicle.setWeight", "Vehicle.setVelocity"), "TTTT")
F3 = Fragment("TUFT", ("Vehicle()", "Vehicle.setWeight", "Vehicle()"), "UTFT")

BRANCHES = """\
class A
  method A()
  end
  method x()
  end
  method y()
  end
  method z()
  end
end

class Main
  global a: A
  static method main()
    a = new A()
    if input(0, 1) == 1
      a.x()
    else
      a.y()
    end
    a.z()
  end
end

interface A
entry Main.main
"""

SILENT = """\
class A
  method A()
  end
end

class Main
  static method main()
    var i: int = 1
  end
end

interface A
entry Main.main
"""


def brute_chains(frags, max_len):
    out = set()
    for k in range(1, max_len + 1):
        for chain in itertools.product(range(len(frags)), repeat=k):
            if all(frags[a].end == frags[b].start for a, b in zip(chain, chain[1:])):
                out.add(chain)
    return out


class TestConcat:
    def test_example_match(self):
        merged = concatenate(F1, F2)
        assert merged.start == "UUFT" and merged.end == "TTTT"
        assert merged.events == F1.events + F2.events
        assert merged.meta is None

    def test_example_reject(self):
        assert not can_concat(F1, F3)
        assert concatenate(F1, F3) is None

    def test_self_loop(self):
        f = Fragment("TF", ("a", "b"), "TF")
        assert concatenate(f, f).events == ("a", "b", "a", "b")

    def test_u_is_not_wildcard(self):
        assert not can_concat(Fragment("T", ("a",), "U"), Fragment("T", ("b",), "T"))


class TestReconstruct:
    def test_example(self):
        out = reconstruct(FragmentSet((F1, F2, F3), "h"), max_chain_length=2)
        assert [t.chain for t in out] == [(0, 1), (2,), (0,), (1,)]
        assert [t.chain for t in out if t.length == 2] == [(0, 1)]
        assert out[0].junctions == ("TTFT",)

    def test_empty(self):
        assert reconstruct(FragmentSet((), "h")) == []

    def test_cycle_bounded(self):
        frags = [Fragment("TT", ("p",), "TF"), Fragment("TF", ("q",), "TT")]
        chains = enumerate_chains(frags, max_chain_length=4)
        assert set(chains) == brute_chains(frags, 4)
        assert len(chains) == 8 and max(map(len, chains)) == 4

    def test_max_outputs(self):
        frags = [Fragment("T", ("p",), "T")] * 3
        assert len(enumerate_chains(frags, 8, max_outputs=50)) == 50

    def test_maximal_first(self):
        frags = [Fragment("TT", ("p",), "TF"), Fragment("TF", ("q",), "FF"), Fragment("UU", ("r",), "UF")]
        assert enumerate_chains(frags, 8) == [(0, 1), (2,), (0,), (1,)]

    def test_mixed_hashes_refused(self):
        with pytest.raises(ConditionSetMismatch):
            reconstruct([FragmentSet((F1,), "h1"), FragmentSet((F2,), "h2")])

    def test_ignores_meta(self, vehicle, vehicle_conditions):
        from fragmon.monitor import RecordingPolicy, run_monitored
        fs = run_monitored(vehicle, vehicle_conditions, RecordingPolicy.windowed(2, 1), 0).fragments
        stripped = FragmentSet(tuple(Fragment(f.start, f.events, f.end) for f in fs), fs.cshash)
        assert reconstruct(fs) == reconstruct(stripped)

    @pytest.mark.parametrize("bad", [dict(max_chain_length=0), dict(max_outputs=-1)])
    def test_bad_bounds(self, bad):
        with pytest.raises(ValueError):
            reconstruct(FragmentSet((F1,), "h"), **bad)

    def test_trace_file_round_trip(self):
        out = reconstruct(FragmentSet((F1, F2, F3), "h"), 2)
        buf = io.StringIO()
        write_traces(out, "h", buf)
        buf.seek(0)
        back = read_traces(buf)
        assert [t.events for t in back] == [t.events for t in out]
        assert [t.chain for t in back] == [t.chain for t in out]


class TestAutomaton:
    def test_vehicle_accepts_trace(self, vehicle):
        a = build_event_automaton(vehicle)
        tr = interpret(vehicle, 0).events
        assert a.accepts(tr)
        assert a.accepts(tr[3:]) is False  # whole-word acceptance needs the prefix
        assert cfg_feasible(a, tr[3:])

    def test_vehicle_order(self, vehicle):
        a = build_event_automaton(vehicle)
        assert cfg_feasible(a, ["Vehicle.getWeight", "Vehicle.getMaxVel"])
        assert not cfg_feasible(a, ["Vehicle.getMaxVel", "Vehicle.getWeight"])
        assert not cfg_feasible(a, ["Vehicle.setWeight"])

    def test_silent_program(self):
        p = parse_program(SILENT)
        a = build_event_automaton(p)
        assert a.accepts([])
        assert not cfg_feasible(a, ["A()"])

    def test_branches(self):
        p = parse_program(BRANCHES)
        a = build_event_automaton(p)
        # exhaustive: every pair of labels against the two real traces
        real = {interpret(p, s).events for s in range(20)}
        assert len(real) == 2
        subs = {t[i:j] for t in real for i in range(len(t)) for j in range(i + 1, len(t) + 1)}
        labels = ["A()", "A.x", "A.y", "A.z"]
        for n in (1, 2, 3):
            for word in itertools.product(labels, repeat=n):
                assert cfg_feasible(a, word) == (word in subs), word

    def test_unknown_label(self, vehicle):
        with pytest.raises(UnknownEventError):
            cfg_feasible(build_event_automaton(vehicle), ["Truck.honk"])

    def test_cached(self, vehicle):
        assert build_event_automaton(vehicle) is build_event_automaton(vehicle)

    def test_annotates_traces(self, vehicle):
        a = build_event_automaton(vehicle)
        out = reconstruct(FragmentSet((Fragment("T", ("Vehicle.getMaxVel",), "F"),
                                       Fragment("F", ("Vehicle.getWeight",), "T")), "h"), 2, automaton=a)
        by_chain = {t.chain: t.feasible for t in out}
        assert by_chain[(0, 1)] is False and by_chain[(1, 0)] is True
