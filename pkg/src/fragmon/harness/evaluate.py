"""End-to-end pipeline and reconstruction-quality metrics."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from ..callgraph import DEFAULT_DEPTH, build_call_graph, relevant_set
from ..monitor.fragments import FragmentSet
from ..monitor.policy import RecordingPolicy
from ..monitor.runtime import MonitorResult, run_monitored
from ..reconstruct.automaton import build_event_automaton
from ..reconstruct.chains import (DEFAULT_MAX_CHAIN, DEFAULT_MAX_OUTPUTS, ReconstructedTrace,
                                  reconstruct)
from ..subject import ir
from ..symexec.conditions import ConditionSet, synthesize
from ..symexec.engine import DEFAULT_INLINE_DEPTH, DEFAULT_LOOP_BOUND

DIGITS = 6


@dataclass(frozen=True)
class Bounds:
    max_chain_length: int = DEFAULT_MAX_CHAIN
    max_outputs: int = DEFAULT_MAX_OUTPUTS
    depth: int = DEFAULT_DEPTH
    loop_bound: int = DEFAULT_LOOP_BOUND
    inline_depth: int = DEFAULT_INLINE_DEPTH


@dataclass(frozen=True)
class Metrics:
    precision: float
    exactness: float
    coverage: float
    overhead_proxy: float
    runs: int
    faulted_runs: int
    conditions: int
    cshash: str
    events_total: int
    events_recorded: int
    signature_evaluations: int
    fragments: int
    traces: int
    multi_fragment_traces: int
    feasible_traces: int
    exact_traces: int
    ground_truth_pairs: int
    witnessed_pairs: int
    junction_audit: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


class _Corpus:
    """Ground-truth traces encoded as one string for substring queries."""

    SEP = "\x00"

    def __init__(self, traces: Sequence[Sequence[str]]):
        labels = sorted({e for t in traces for e in t})
        self.code = {e: chr(0x100 + i) for i, e in enumerate(labels)}
        self.text = self.SEP + self.SEP.join(self.encode(t) for t in traces) + self.SEP
        self.pairs = {(t[i], t[i + 1]) for t in traces for i in range(len(t) - 1)}

    def encode(self, events: Sequence[str]) -> Optional[str]:
        try:
            return "".join(self.code[e] for e in events)
        except KeyError:
            return None

    def contains(self, events: Sequence[str]) -> bool:
        s = self.encode(events)
        return s is not None and s in self.text


def _ratio(num: int, den: int) -> float:
    return round(num / den, DIGITS) if den else 0.0


def compute_metrics(results: Sequence[MonitorResult], fragments: FragmentSet,
                    traces: Sequence[ReconstructedTrace], conditions: ConditionSet) -> Metrics:
    """Score reconstructed traces against the ground truth carried by ``results``.

    Precision and exactness range over multi-fragment traces; with traces
    present but none multi-fragment both are 1.0, and with no traces at all
    every ratio is 0.0.
    """
    corpus = _Corpus([r.trace.events for r in results])
    multi = [t for t in traces if t.length > 1]
    feasible = sum(1 for t in multi if t.feasible)
    exact = sum(1 for t in multi if corpus.contains(t.events))
    if not traces:
        precision = exactness = 0.0
    elif not multi:
        precision = exactness = 1.0
    else:
        precision = _ratio(feasible, len(multi))
        exactness = _ratio(exact, len(multi))
    witnessed = set()
    for t in traces:
        ev = t.events
        witnessed.update(zip(ev, ev[1:]))
    hit = len(witnessed & corpus.pairs)
    if corpus.pairs:
        coverage = _ratio(hit, len(corpus.pairs))
    else:
        coverage = 1.0 if traces else 0.0
    junctions = sum(len(t.junctions) for t in traces)
    frags = fragments.fragments
    good = sum(1 for t in traces for a, b in zip(t.chain, t.chain[1:]) if frags[a].end == frags[b].start)
    audit = _ratio(good, junctions) if junctions else 1.0
    total = sum(r.stats.events_total for r in results)
    recorded = sum(r.stats.events_recorded for r in results)
    overhead = round(sum(r.stats.recorded_fraction for r in results) / len(results), DIGITS) if results else 0.0
    return Metrics(
        precision=precision,
        exactness=exactness,
        coverage=coverage,
        overhead_proxy=overhead,
        runs=len(results),
        faulted_runs=sum(1 for r in results if r.fault),
        conditions=len(conditions),
        cshash=conditions.hash,
        events_total=total,
        events_recorded=recorded,
        signature_evaluations=sum(r.stats.signature_evaluations for r in results),
        fragments=len(frags),
        traces=len(traces),
        multi_fragment_traces=len(multi),
        feasible_traces=feasible,
        exact_traces=exact,
        ground_truth_pairs=len(corpus.pairs),
        witnessed_pairs=hit,
        junction_audit=audit,
    )


@dataclass
class PipelineResult:
    conditions: ConditionSet
    results: list
    fragments: FragmentSet
    traces: list
    metrics: Metrics = field(repr=False, default=None)


def run_pipeline(program: ir.SubjectProgram, n_runs: int, policy: RecordingPolicy,
                 bounds: Bounds = Bounds(), conditions: Optional[ConditionSet] = None,
                 installations: int = 1) -> PipelineResult:
    """Synthesize, monitor runs with seeds ``0..n_runs-1``, merge, reconstruct and score."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if conditions is None:
        rel = relevant_set(build_call_graph(program), program.interfaces_of_interest, bounds.depth)
        conditions = synthesize(program, rel, bounds.loop_bound, bounds.inline_depth)
    results = [run_monitored(program, conditions, policy, seed,
                             installation_id=f"inst{seed % installations}")
               for seed in range(n_runs)]
    merged = FragmentSet.merge([r.fragments for r in results])
    if not merged.cshash:
        merged = FragmentSet(merged.fragments, conditions.hash)
    automaton = build_event_automaton(program)
    traces = reconstruct(merged, bounds.max_chain_length, bounds.max_outputs, automaton)
    out = PipelineResult(conditions, results, merged, traces)
    out.metrics = compute_metrics(results, merged, traces, conditions)
    return out


def evaluate(program: ir.SubjectProgram, n_runs: int, policy: RecordingPolicy,
             bounds: Bounds = Bounds()) -> Metrics:
    return run_pipeline(program, n_runs, policy, bounds).metrics
