from importlib import resources

import pytest

from fragmon.callgraph import build_call_graph, relevant_set
from fragmon.harness import generate_subject
from fragmon.subject import ConcreteState, parse_program
from fragmon.symexec import synthesize

# PASS/FAIL lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


def vehicle_text() -> str:
    return resources.files("fragmon").joinpath("data/vehicle.subj").read_text(encoding="utf-8")


def vehicle_state(program, weights=None, vels=(100, 100, 100), null=()):
    """State with truck, van, car allocated (in that order) unless listed in ``null``."""
    weights = weights or (1000, 1000, 1000)
    st = ConcreteState.initial(program)
    for name, w, v in zip(("truck", "van", "car"), weights, vels):
        if name in null:
            continue
        r = st.allocate("Vehicle")
        st.set_field(r, "weight", w)
        st.set_field(r, "maxVel", v)
        st.globals[f"VehicleService.{name}"] = r
    return st


def conditions_for(program, depth=1, loop_bound=3, inline_depth=2):
    rel = relevant_set(build_call_graph(program), program.interfaces_of_interest, depth)
    return synthesize(program, rel, loop_bound, inline_depth)


@pytest.fixture(scope="session")
def vehicle_source():
    return vehicle_text()


@pytest.fixture(scope="session")
def vehicle(vehicle_source):
    return parse_program(vehicle_source)


@pytest.fixture(scope="session")
def vehicle_conditions(vehicle):
    return conditions_for(vehicle)


@pytest.fixture(scope="session")
def small_corpus():
    """A handful of generated programs with their condition sets."""
    out = []
    for seed in range(6):
        p = generate_subject(rng_seed=200 + seed, allow_faults=seed % 3 == 2)
        out.append((p, conditions_for(p)))
    return out
