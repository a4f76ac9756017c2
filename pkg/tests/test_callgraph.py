from collections import deque

import pytest

from fragmon.callgraph import build_call_graph, relevant_set
from fragmon.subject import MethodRef, interpret, parse_program
from fragmon.harness import generate_subject

CHAIN = """\
class V
  method V()
  end
  method ping(): int
    return 1
  end
end

class B
  global v: V
  static method useV(): int
    return v.ping()
  end
end

class A
  static method callB(): int
    return B.useV()
  end
  static method fact(n: int): int
    if n <= 1
      return 1
    end
    return n * fact(n - 1)
  end
end

class Main
  static method main()
    B.v = new V()
    var x: int = A.callB()
  end
end

interface V
entry Main.main
"""

NO_CALLS = """\
class V
  field x: int
end

class Main
  static method main()
    var i: int = 0
  end
end

interface V
entry Main.main
"""


def bfs_oracle(cg, seeds, depth):
    """Plain undirected BFS, written independently of relevant_set."""
    adj = {}
    for e in cg.edges:
        adj.setdefault(e.caller, set()).add(e.callee)
        adj.setdefault(e.callee, set()).add(e.caller)
    seen = {s: 0 for s in seeds}
    q = deque(seeds)
    while q:
        m = q.popleft()
        for n in adj.get(m, ()):
            if n not in seen and seen[m] < depth:
                seen[n] = seen[m] + 1
                q.append(n)
    return set(seen)


def test_vehicle_edges(vehicle):
    cg = build_call_graph(vehicle)
    pairs = sorted((str(e.caller), str(e.callee)) for e in cg.edges
                   if e.caller.name in ("weight", "velocity"))
    assert pairs == [("VehicleService.velocity", "Vehicle.getMaxVel")] * 3 + \
                    [("VehicleService.weight", "Vehicle.getWeight")] * 3
    # one edge per site
    assert len({e.site for e in cg.edges}) == len(cg.edges)


def test_vehicle_depth_one_classes(vehicle):
    rel = relevant_set(build_call_graph(vehicle), {"Vehicle"}, 1)
    assert rel.classes == {"Vehicle", "VehicleService"}
    assert MethodRef("VehicleService", "weight") in rel.methods


def test_depth_zero_is_interface_methods(vehicle):
    rel = relevant_set(build_call_graph(vehicle), {"Vehicle"}, 0)
    assert rel.methods == {m.ref for m in vehicle.cls("Vehicle").methods}


def test_no_calls():
    p = parse_program(NO_CALLS)
    cg = build_call_graph(p)
    assert cg.nodes and not cg.edges


def test_recursion_self_edge():
    cg = build_call_graph(parse_program(CHAIN))
    fact = MethodRef("A", "fact")
    assert any(e.caller == fact and e.callee == fact for e in cg.edges)


def test_chain_depth_two_reaches_a():
    cg = build_call_graph(parse_program(CHAIN))
    assert MethodRef("A", "callB") not in relevant_set(cg, {"V"}, 1).methods
    rel = relevant_set(cg, {"V"}, 2)
    assert MethodRef("A", "callB") in rel.methods
    assert rel.methods == bfs_oracle(cg, list(cg.methods_of("V")), 2)


def test_unknown_interface(vehicle):
    with pytest.raises(KeyError):
        relevant_set(build_call_graph(vehicle), {"Truck"}, 1)


@pytest.mark.parametrize("seed", range(5))
def test_monotone_and_fixpoint(seed):
    p = generate_subject(rng_seed=seed)
    cg = build_call_graph(p)
    sets = [relevant_set(cg, p.interfaces_of_interest, d).methods for d in range(len(cg.nodes) + 2)]
    assert all(a <= b for a, b in zip(sets, sets[1:]))
    assert any(a == b for a, b in zip(sets, sets[1:]))


@pytest.mark.parametrize("seed", range(5))
def test_runtime_calls_are_edges(seed):
    p = generate_subject(rng_seed=seed)
    edges = {(e.caller, e.callee) for e in build_call_graph(p).edges}
    seen = set()

    class Spy:
        def before_event(self, *a):
            pass

        def on_call(self, caller, callee):
            seen.add((caller, callee))

    interpret(p, 0, observer=Spy())
    assert seen and seen <= edges


def test_dot_export(vehicle):
    dot = build_call_graph(vehicle).to_dot()
    assert dot.startswith("digraph") and '"VehicleService.weight" -> "Vehicle.getWeight"' in dot
