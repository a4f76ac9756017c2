import pytest

from fragmon.subject import (UNKNOWN, ConfigurationError, DuplicateNameError, ParseError,
                             ResolutionError, TypeCheckError, eval_state_path, interpret,
                             parse_program, tdiv)

from conftest import vehicle_state

MINIMAL = """\
class A
  field x: int
  method A(v: int)
    self.x = v
  end
  method get(): int
    return self.x
  end
end

class Main
  global a: A
  static method main()
{body}
  end
end

interface A
entry Main.main
"""


def minimal(body: str):
    return parse_program(MINIMAL.format(body=body))


class TestParse:
    def test_vehicle_shape(self, vehicle):
        assert [c.name for c in vehicle.classes] == ["Vehicle", "VehicleService"]
        assert [g.name for g in vehicle.globals] == ["truck", "van", "car"]
        assert vehicle.interfaces_of_interest == {"Vehicle"}
        assert str(vehicle.entry) == "VehicleService.main"

    def test_no_classes_entry_unresolved(self):
        with pytest.raises(ResolutionError, match="entry method unresolved"):
            parse_program("entry Main.main\n")

    def test_bool_into_int_is_type_error(self):
        with pytest.raises(TypeCheckError) as exc:
            minimal("    var b: bool = true\n    var x: int = b")
        assert exc.value.line == 15

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError) as exc:
            minimal("    var x: int = (1 +")
        assert exc.value.line == 14 and exc.value.col > 0

    def test_duplicate_field(self):
        src = MINIMAL.format(body="").replace("  field x: int", "  field x: int\n  field x: bool")
        with pytest.raises(DuplicateNameError):
            parse_program(src)

    def test_missing_end(self):
        with pytest.raises(ParseError, match="missing 'end'"):
            minimal("    if true\n      a = new A(1)")

    def test_unknown_interface(self):
        with pytest.raises(ResolutionError):
            parse_program(MINIMAL.format(body="").replace("interface A", "interface Nope"))

    def test_input_only_in_entry(self):
        src = MINIMAL.format(body="").replace("    return self.x", "    return input(0, 1)")
        with pytest.raises(TypeCheckError, match="entry"):
            parse_program(src)

    def test_comparisons_do_not_chain(self):
        with pytest.raises(ParseError):
            minimal("    var b: bool = 1 < 2 < 3")


class TestInterpret:
    def test_vehicle_trace(self, vehicle):
        # hand trace of main: three constructors, weight() then velocity()
        tr = interpret(vehicle, 0)
        assert tr.events == ("Vehicle()",) * 3 + ("Vehicle.getWeight",) * 3 + ("Vehicle.getMaxVel",) * 3
        assert not tr.faulted

    def test_deterministic(self, vehicle):
        a = interpret(vehicle, 5, record_snapshots=True)
        b = interpret(vehicle, 5, record_snapshots=True)
        assert a.events == b.events
        assert [s.heap for s in a.snapshots] == [s.heap for s in b.snapshots]

    def test_empty_entry(self):
        assert interpret(minimal("    var z: int = 0"), 0).events == ()

    def test_null_dereference_faults(self):
        tr = interpret(minimal("    a = new A(1)\n    var y: int = a.get()\n    a = null\n    var z: int = a.get()"), 0)
        assert tr.faulted
        assert tr.events == ("A()", "A.get")

    def test_step_budget(self):
        tr = interpret(minimal("    var i: int = 0\n    while true\n      i = i + 1\n    end"), 0, step_budget=500)
        assert tr.faulted and "budget" in tr.fault

    def test_snapshot_is_state_before_event(self, vehicle):
        tr = interpret(vehicle, 3, record_snapshots=True)
        assert len(tr.snapshots) == len(tr.events)
        # before the first constructor nothing is bound yet
        assert eval_state_path(tr.snapshots[0], "VehicleService.truck.weight") is UNKNOWN
        # before getWeight every vehicle exists
        w = eval_state_path(tr.snapshots[3], "VehicleService.truck.weight")
        assert 1000 <= w <= 9000

    @pytest.mark.parametrize("a,b,q", [(7, 2, 3), (-7, 2, -3), (7, -2, -3), (-7, -2, 3), (0, 5, 0)])
    def test_division_truncates(self, a, b, q):
        assert tdiv(a, b) == q


class TestStatePath:
    def test_value(self, vehicle):
        st = vehicle_state(vehicle, (6000, 5000, 7000))
        assert eval_state_path(st, "VehicleService.truck.weight") == 6000

    def test_null_prefix_is_unknown(self, vehicle):
        st = vehicle_state(vehicle, null=("truck",))
        assert eval_state_path(st, "VehicleService.truck.weight") is UNKNOWN

    def test_bad_field_is_configuration_error(self, vehicle):
        st = vehicle_state(vehicle)
        with pytest.raises(ConfigurationError):
            eval_state_path(st, "VehicleService.truck.colour")
        with pytest.raises(ConfigurationError):
            eval_state_path(st, "VehicleService.bus.weight")
