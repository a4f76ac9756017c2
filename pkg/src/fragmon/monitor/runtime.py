"""Monitored execution: the interpreter plus a recorder driven by a policy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..subject import ir
from ..subject.interp import DEFAULT_STEP_BUDGET, GroundTruthTrace, Interpreter
from ..subject.state import ConcreteState, path_type
from ..symexec.conditions import ConditionSet
from .fragments import Fragment, FragmentMeta, FragmentSet
from .policy import RecordingPolicy


def check_conditions(conditions: ConditionSet, program: ir.SubjectProgram) -> None:
    """Raise ConfigurationError if a condition reads a path the program does not declare."""
    for c in conditions:
        for p in c.paths():
            path_type(program, p)


def evaluate_signature(conditions: ConditionSet, state: ConcreteState) -> str:
    """One T/F/U outcome per condition, in condition-set order."""
    return "".join(c.evaluate(state) for c in conditions)


@dataclass(frozen=True)
class OverheadStats:
    events_recorded: int
    events_total: int
    signature_evaluations: int

    @property
    def recorded_fraction(self) -> float:
        return self.events_recorded / self.events_total if self.events_total else 0.0

    def to_dict(self) -> dict:
        return {
            "events_recorded": self.events_recorded,
            "events_total": self.events_total,
            "signature_evaluations": self.signature_evaluations,
            "recorded_fraction": self.recorded_fraction,
        }


@dataclass
class MonitorResult:
    fragments: FragmentSet
    stats: OverheadStats
    trace: GroundTruthTrace
    fault: Optional[str] = None


@dataclass
class _Open:
    start: str
    start_index: int
    events: list = field(default_factory=list)


class _Recorder:
    def __init__(self, conditions: ConditionSet, policy: RecordingPolicy, run_id, installation_id: str):
        self.conditions = conditions
        self.decider = policy.start(run_id if isinstance(run_id, int) else 0)
        self.run_id = run_id
        self.installation_id = installation_id
        self.open: Optional[_Open] = None
        self.recorded = 0
        self.total = 0
        self.evaluations = 0
        self.fragments: list[Fragment] = []

    def _signature(self, state: ConcreteState) -> str:
        self.evaluations += 1
        return evaluate_signature(self.conditions, state)

    def close(self, state: ConcreteState) -> None:
        o = self.open
        self.open = None
        if o is None or not o.events:
            return
        end = self._signature(state)
        meta = FragmentMeta(self.run_id, self.installation_id, o.start_index,
                            o.start_index + len(o.events) - 1)
        self.fragments.append(Fragment(o.start, tuple(o.events), end, meta))

    def before_event(self, index: int, label: str, state: ConcreteState) -> None:
        self.total += 1
        on = self.decider.decide(index, self.recorded)
        if self.open is not None and not on:
            self.close(state)
        if on:
            if self.open is None:
                self.open = _Open(self._signature(state), index)
            self.open.events.append(label)
            self.recorded += 1


def run_monitored(program: ir.SubjectProgram, conditions: ConditionSet, policy: RecordingPolicy,
                  input_seed: int = 0, *, installation_id: str = "local",
                  record_snapshots: bool = False,
                  step_budget: int = DEFAULT_STEP_BUDGET) -> MonitorResult:
    """Run the program once, collecting fragments under ``policy``.

    Policy decisions happen only at event boundaries. A fault closes the open
    fragment on the state at the fault and keeps it.
    """
    check_conditions(conditions, program)
    rec = _Recorder(conditions, policy, input_seed, installation_id)
    interp = Interpreter(program, input_seed, observer=rec, record_snapshots=record_snapshots,
                         step_budget=step_budget)
    trace = interp.run()
    rec.close(trace.final_state)
    stats = OverheadStats(rec.recorded, rec.total, rec.evaluations)
    fs = FragmentSet(tuple(rec.fragments), conditions.hash)
    return MonitorResult(fs, stats, trace, trace.fault)


def collect(program: ir.SubjectProgram, conditions: ConditionSet, policy: RecordingPolicy,
            seeds, installation_id: str = "local") -> tuple[FragmentSet, list[MonitorResult]]:
    """Monitor several runs and merge their fragments."""
    results = [run_monitored(program, conditions, policy, s, installation_id=installation_id)
               for s in seeds]
    merged = FragmentSet.merge([r.fragments for r in results]) if results else FragmentSet((), conditions.hash)
    if not merged.cshash:
        merged = FragmentSet(merged.fragments, conditions.hash)
    return merged, results
